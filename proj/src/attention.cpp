#include "latticeformer/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "latticeformer/error.hpp"
#include "latticeformer/ops.hpp"

namespace latticeformer {

std::string_view to_string(AttentionMode mode) noexcept {
  return mode == AttentionMode::lsa ? "lsa" : "vanilla";
}

AttentionMode parse_attention_mode(std::string_view text) {
  if (text == "vanilla") return AttentionMode::vanilla;
  if (text == "lsa") return AttentionMode::lsa;
  throw InputError("unknown attention mode '" + std::string(text) + "'");
}

template <typename T>
Var<T> scaled_dot_attention(Var<T> queries, Var<T> keys, Var<T> values, T scale,
                            const Mask* mask) {
  Var<T> logits = latticeformer::scale(matmul_transposed(queries, keys), scale);
  Var<T> weights = softmax_rows(logits, mask);
  return matmul(weights, values);
}

template <typename T>
Var<T> lattice_attention(Var<T> queries, Var<T> keys, Var<T> values,
                         const RelationMatrix& relations, Var<T> relation_keys,
                         Var<T> relation_values, T scale) {
  const std::size_t m = queries.value().rows();
  if (keys.value().rows() != m || values.value().rows() != m || relations.size() != m) {
    throw std::invalid_argument("lattice_attention: queries, keys, values and relations must all cover the same " +
                                std::to_string(m) + " edges");
  }
  if (relation_keys.value().cols() != queries.value().cols() ||
      relation_values.value().cols() != values.value().cols()) {
    throw std::invalid_argument("lattice_attention: relation table width must equal head width");
  }
  Var<T> key_pairs = relation_gather(relation_keys, relations);
  Var<T> logits = add(matmul_transposed(queries, keys), pair_scores(queries, key_pairs));
  Var<T> weights = softmax_rows(latticeformer::scale(logits, scale));
  Var<T> value_pairs = relation_gather(relation_values, relations);
  return add(matmul(weights, values), pair_mix(weights, value_pairs));
}

template <typename T>
RelationTables<T> make_relation_tables(ParamStore<T>& store, const std::string& prefix,
                                       std::size_t head_dim, const Initializer& init) {
  RelationTables<T> tables;
  tables.keys = &store.add(prefix + ".rel_keys", {kRelationCount, head_dim});
  tables.values = &store.add(prefix + ".rel_values", {kRelationCount, head_dim});
  init.uniform(*tables.keys, kRelationInitLimit);
  init.uniform(*tables.values, kRelationInitLimit);
  return tables;
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParamStore<T>& store, const std::string& prefix,
                                          std::size_t d_model, std::size_t heads,
                                          AttentionScaling scaling, const Initializer& init)
    : d_model_(d_model), heads_(heads), scaling_(scaling) {
  if (heads == 0 || d_model % heads != 0) {
    throw std::invalid_argument("model dimension must be divisible by the head count");
  }
  w_q_ = &store.add(prefix + ".w_q", {d_model, d_model});
  w_k_ = &store.add(prefix + ".w_k", {d_model, d_model});
  w_v_ = &store.add(prefix + ".w_v", {d_model, d_model});
  w_o_ = &store.add(prefix + ".w_o", {d_model, d_model});
  for (Parameter<T>* p : {w_q_, w_k_, w_v_, w_o_}) init.xavier(*p);
}

template <typename T>
T MultiHeadAttention<T>::scale() const noexcept {
  const std::size_t dim = scaling_ == AttentionScaling::head_dim ? head_dim() : d_model_;
  return static_cast<T>(1.0 / std::sqrt(static_cast<double>(dim)));
}

template <typename T>
Var<T> MultiHeadAttention<T>::attend(Var<T> q, Var<T> k, Var<T> v,
                                     const RelationMatrix* relations,
                                     const RelationTables<T>* tables, const Mask* mask) const {
  Graph<T>& g = *q.graph;
  const std::size_t width = head_dim();
  std::vector<Var<T>> outputs;
  outputs.reserve(heads_);
  if (tables != nullptr) {
    if (relations == nullptr) throw std::invalid_argument("lattice-aware attention needs relations");
    // One node per table so all heads accumulate into the same gradient.
    Var<T> rel_keys = g.parameter(*tables->keys);
    Var<T> rel_values = g.parameter(*tables->values);
    for (std::size_t h = 0; h < heads_; ++h) {
      outputs.push_back(lattice_attention(slice_cols(q, h * width, width),
                                          slice_cols(k, h * width, width),
                                          slice_cols(v, h * width, width), *relations, rel_keys,
                                          rel_values, scale()));
    }
  } else {
    for (std::size_t h = 0; h < heads_; ++h) {
      outputs.push_back(scaled_dot_attention(slice_cols(q, h * width, width),
                                             slice_cols(k, h * width, width),
                                             slice_cols(v, h * width, width), scale(), mask));
    }
  }
  Var<T> joined = heads_ == 1 ? outputs.front() : concat_cols<T>(outputs);
  return matmul(joined, g.parameter(*w_o_));
}

template <typename T>
Var<T> MultiHeadAttention<T>::self_attention(Var<T> x, const RelationMatrix* relations,
                                             const RelationTables<T>* tables,
                                             const Mask* mask) const {
  Graph<T>& g = *x.graph;
  Var<T> q = matmul(x, g.parameter(*w_q_));
  Var<T> k = matmul(x, g.parameter(*w_k_));
  Var<T> v = matmul(x, g.parameter(*w_v_));
  return attend(q, k, v, relations, tables, mask);
}

template <typename T>
Var<T> MultiHeadAttention<T>::cross_attention(Var<T> queries_from, Var<T> memory,
                                              const Mask* mask) const {
  Graph<T>& g = *queries_from.graph;
  Var<T> q = matmul(queries_from, g.parameter(*w_q_));
  Var<T> k = matmul(memory, g.parameter(*w_k_));
  Var<T> v = matmul(memory, g.parameter(*w_v_));
  return attend(q, k, v, nullptr, nullptr, mask);
}

#define LATTICEFORMER_INSTANTIATE(T)                                                          \
  template Var<T> scaled_dot_attention<T>(Var<T>, Var<T>, Var<T>, T, const Mask*);            \
  template Var<T> lattice_attention<T>(Var<T>, Var<T>, Var<T>, const RelationMatrix&, Var<T>, \
                                       Var<T>, T);                                            \
  template RelationTables<T> make_relation_tables<T>(ParamStore<T>&, const std::string&,      \
                                                     std::size_t, const Initializer&);        \
  template class MultiHeadAttention<T>;

LATTICEFORMER_INSTANTIATE(float)
LATTICEFORMER_INSTANTIATE(double)

}  // namespace latticeformer
