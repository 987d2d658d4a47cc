#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "latticeformer/functional.hpp"
#include "latticeformer/graph.hpp"
#include "latticeformer/init.hpp"
#include "latticeformer/lattice.hpp"

namespace latticeformer {

enum class AttentionMode {
  vanilla,
  lsa,  // lattice-aware: relation embeddings added to keys and values
};

std::string_view to_string(AttentionMode mode) noexcept;
AttentionMode parse_attention_mode(std::string_view text);

// Which dimension the dot products are scaled by.
enum class AttentionScaling {
  head_dim,   // 1/sqrt(d_h), the multi-head convention
  model_dim,  // 1/sqrt(d), the literal single-head formula
};

// One head over already-projected inputs:
//   u = q k^T * scale,  alpha = softmax_rows(u),  out = alpha v
// Queries and keys may differ in length (cross attention).
template <typename T>
Var<T> scaled_dot_attention(Var<T> queries, Var<T> keys, Var<T> values, T scale,
                            const Mask* mask = nullptr);

// One lattice-aware head over projected inputs (all M x d_h):
//   e_ij  = q_i . (k_j + rk[rel(i,j)]) * scale
//   out_i = sum_j alpha_ij (v_j + rv[rel(i,j)])
// The 8 x d_h relation tables are gathered into (M*M) x d_h blocks so both
// terms reduce to batched products.
template <typename T>
Var<T> lattice_attention(Var<T> queries, Var<T> keys, Var<T> values,
                         const RelationMatrix& relations, Var<T> relation_keys,
                         Var<T> relation_values, T scale);

// Per-layer relation embeddings, shared by every head of the layer.
template <typename T>
struct RelationTables {
  Parameter<T>* keys = nullptr;    // 8 x d_h
  Parameter<T>* values = nullptr;  // 8 x d_h
};

inline constexpr double kRelationInitLimit = 0.05;

template <typename T>
RelationTables<T> make_relation_tables(ParamStore<T>& store, const std::string& prefix,
                                       std::size_t head_dim, const Initializer& init);

template <typename T>
class MultiHeadAttention {
 public:
  // Registers `<prefix>.w_q`, `.w_k`, `.w_v`, `.w_o` (all d x d, no bias).
  MultiHeadAttention(ParamStore<T>& store, const std::string& prefix, std::size_t d_model,
                     std::size_t heads, AttentionScaling scaling, const Initializer& init);

  // Self attention over x (M x d). When `tables` is given every head runs
  // lattice_attention with `relations`; otherwise scaled_dot_attention.
  Var<T> self_attention(Var<T> x, const RelationMatrix* relations,
                        const RelationTables<T>* tables, const Mask* mask = nullptr) const;

  // Queries from `queries_from`, keys and values from `memory`.
  Var<T> cross_attention(Var<T> queries_from, Var<T> memory, const Mask* mask = nullptr) const;

  std::size_t heads() const noexcept { return heads_; }
  std::size_t head_dim() const noexcept { return d_model_ / heads_; }
  T scale() const noexcept;

  Parameter<T>& w_q() const noexcept { return *w_q_; }
  Parameter<T>& w_k() const noexcept { return *w_k_; }
  Parameter<T>& w_v() const noexcept { return *w_v_; }
  Parameter<T>& w_o() const noexcept { return *w_o_; }

 private:
  Var<T> attend(Var<T> q, Var<T> k, Var<T> v, const RelationMatrix* relations,
                const RelationTables<T>* tables, const Mask* mask) const;

  std::size_t d_model_;
  std::size_t heads_;
  AttentionScaling scaling_;
  Parameter<T>* w_q_;
  Parameter<T>* w_k_;
  Parameter<T>* w_v_;
  Parameter<T>* w_o_;
};

}  // namespace latticeformer
