#include "latticeformer/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "latticeformer/ops.hpp"

namespace latticeformer {

void EncoderConfig::validate() const {
  if (d_model == 0 || heads == 0 || layers == 0 || d_ff == 0 || vocab_size == 0) {
    throw std::invalid_argument("encoder extents must all be at least 1");
  }
  if (d_model % heads != 0) throw std::invalid_argument("d_model must be divisible by heads");
  if (d_model % 2 != 0) throw std::invalid_argument("d_model must be even for sinusoidal positions");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
}

EncoderInput make_encoder_input(const Lattice& lattice, const Vocabulary& vocab) {
  EncoderInput input;
  input.token_ids.reserve(lattice.edge_count());
  for (const Edge& e : lattice.edges) input.token_ids.push_back(vocab.id(e.surface));
  input.positions = lattice_positions(lattice);
  input.relations = relation_matrix(lattice);
  return input;
}

EncoderInput reorder_input(const EncoderInput& input, std::span<const std::size_t> order) {
  if (order.size() != input.size()) throw std::invalid_argument("reorder_input: bad order length");
  EncoderInput out;
  out.token_ids.resize(order.size());
  out.positions.positions.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.token_ids[k] = input.token_ids[order[k]];
    out.positions.positions[k] = input.positions.positions[order[k]];
  }
  out.relations = input.relations.reindexed(order);
  return out;
}

ParamCount param_count(const EncoderConfig& config) {
  const std::size_t d = config.d_model;
  ParamCount count;
  count.embedding = config.vocab_size * d;
  count.attention = config.layers * 4 * d * d;
  count.feed_forward = config.layers * (d * config.d_ff + config.d_ff + config.d_ff * d + d);
  count.layer_norm = config.layers * 2 * 2 * d + (config.pre_norm ? 2 * d : 0);
  count.lsa_delta = config.layers * 2 * kRelationCount * config.head_dim();
  count.lpe_delta = 0;
  count.relation_tables = config.attention == AttentionMode::lsa ? count.lsa_delta : 0;
  count.total = count.embedding + count.attention + count.feed_forward + count.layer_norm +
                count.relation_tables;
  return count;
}

template <typename T>
LayerNormParams<T> LayerNormParams<T>::make(ParamStore<T>& store, const std::string& prefix,
                                            std::size_t width, double eps,
                                            const Initializer& init) {
  LayerNormParams<T> p;
  p.gain = &store.add(prefix + ".gain", {width});
  p.bias = &store.add(prefix + ".bias", {width});
  p.eps = eps;
  init.constant(*p.gain, 1.0);
  init.constant(*p.bias, 0.0);
  return p;
}

template <typename T>
Var<T> LayerNormParams<T>::apply(Var<T> x) const {
  Graph<T>& g = *x.graph;
  return layer_norm(x, g.parameter(*gain), g.parameter(*bias), static_cast<T>(eps));
}

template <typename T>
FeedForward<T> FeedForward<T>::make(ParamStore<T>& store, const std::string& prefix,
                                    std::size_t d_model, std::size_t d_ff,
                                    const Initializer& init) {
  FeedForward<T> f;
  f.w1 = &store.add(prefix + ".w1", {d_model, d_ff});
  f.b1 = &store.add(prefix + ".b1", {d_ff});
  f.w2 = &store.add(prefix + ".w2", {d_ff, d_model});
  f.b2 = &store.add(prefix + ".b2", {d_model});
  init.xavier(*f.w1);
  init.xavier(*f.w2);
  init.constant(*f.b1, 0.0);
  init.constant(*f.b2, 0.0);
  return f;
}

template <typename T>
Var<T> FeedForward<T>::apply(Var<T> x) const {
  Graph<T>& g = *x.graph;
  Var<T> hidden = relu(add_row(matmul(x, g.parameter(*w1)), g.parameter(*b1)));
  return add_row(matmul(hidden, g.parameter(*w2)), g.parameter(*b2));
}

template <typename T>
Var<T> residual_block(Var<T> x, const std::function<Var<T>(Var<T>)>& sublayer,
                      const LayerNormParams<T>& norm, bool pre_norm, double dropout_rate) {
  if (pre_norm) return add(x, dropout(sublayer(norm.apply(x)), dropout_rate));
  return norm.apply(add(x, dropout(sublayer(x), dropout_rate)));
}

template <typename T>
EncoderLayer<T>::EncoderLayer(ParamStore<T>& store, const std::string& prefix,
                              const EncoderConfig& config, const Initializer& init)
    : config_(&config),
      attention_(store, prefix + ".attn", config.d_model, config.heads, config.scaling, init) {
  if (config.attention == AttentionMode::lsa) {
    tables_ = make_relation_tables(store, prefix, config.head_dim(), init);
  }
  attention_norm_ =
      LayerNormParams<T>::make(store, prefix + ".attn_norm", config.d_model, config.layer_norm_eps, init);
  feed_forward_ = FeedForward<T>::make(store, prefix + ".ffn", config.d_model, config.d_ff, init);
  feed_forward_norm_ =
      LayerNormParams<T>::make(store, prefix + ".ffn_norm", config.d_model, config.layer_norm_eps, init);
}

template <typename T>
Var<T> EncoderLayer<T>::forward(Var<T> x, const RelationMatrix& relations) const {
  const RelationTables<T>* tables = tables_ ? &*tables_ : nullptr;
  Var<T> h = residual_block<T>(
      x, [&](Var<T> in) { return attention_.self_attention(in, &relations, tables); },
      attention_norm_, config_->pre_norm, config_->dropout);
  return residual_block<T>(
      h, [&](Var<T> in) { return feed_forward_.apply(in); }, feed_forward_norm_,
      config_->pre_norm, config_->dropout);
}

template <typename T>
Encoder<T>::Encoder(ParamStore<T>& store, EncoderConfig config, const Initializer& init,
                    const std::string& prefix)
    : config_(std::move(config)) {
  config_.validate();
  embedding_ = &store.add(prefix + ".embedding", {config_.vocab_size, config_.d_model});
  init.normal(*embedding_, 1.0 / std::sqrt(static_cast<double>(config_.d_model)));
  layers_.reserve(config_.layers);
  for (std::size_t k = 0; k < config_.layers; ++k) {
    layers_.emplace_back(store, prefix + ".layer" + std::to_string(k), config_, init);
  }
  if (config_.pre_norm) {
    final_norm_ = LayerNormParams<T>::make(store, prefix + ".final_norm", config_.d_model,
                                           config_.layer_norm_eps, init);
  }
}

template <typename T>
Var<T> Encoder<T>::encode(Graph<T>& graph, const EncoderInput& input) const {
  if (input.size() == 0) throw std::invalid_argument("encode: lattice has no edges");
  if (input.positions.positions.size() != input.size() || input.relations.size() != input.size()) {
    throw std::invalid_argument("encode: token ids, positions and relations disagree in size");
  }
  Var<T> x = embedding(graph.parameter(*embedding_), std::span<const std::size_t>(input.token_ids));
  if (config_.scale_embeddings) {
    x = scale(x, static_cast<T>(std::sqrt(static_cast<double>(config_.d_model))));
  }
  if (config_.positional != PositionalMode::none) {
    x = add(x, graph.constant(
                   positional_matrix<T>(input.positions, config_.positional, config_.d_model)));
  }
  x = dropout(x, config_.dropout);
  for (const auto& layer : layers_) x = layer.forward(x, input.relations);
  if (final_norm_) x = final_norm_->apply(x);
  return x;
}

#define LATTICEFORMER_INSTANTIATE(T)                                                       \
  template struct LayerNormParams<T>;                                                      \
  template struct FeedForward<T>;                                                          \
  template Var<T> residual_block<T>(Var<T>, const std::function<Var<T>(Var<T>)>&,          \
                                    const LayerNormParams<T>&, bool, double);              \
  template class EncoderLayer<T>;                                                          \
  template class Encoder<T>;

LATTICEFORMER_INSTANTIATE(float)
LATTICEFORMER_INSTANTIATE(double)

}  // namespace latticeformer
