#include "latticeformer/decoder.hpp"

#include <cmath>
#include <stdexcept>

#include "latticeformer/ops.hpp"
#include "latticeformer/positional.hpp"

namespace latticeformer {

void DecoderConfig::validate() const {
  if (d_model == 0 || heads == 0 || layers == 0 || d_ff == 0 || vocab_size == 0) {
    throw std::invalid_argument("decoder extents must all be at least 1");
  }
  if (d_model % heads != 0) throw std::invalid_argument("d_model must be divisible by heads");
  if (d_model % 2 != 0) throw std::invalid_argument("d_model must be even for sinusoidal positions");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
}

template <typename T>
DecoderLayer<T>::DecoderLayer(ParamStore<T>& store, const std::string& prefix,
                              const DecoderConfig& config, const Initializer& init)
    : config_(&config),
      self_attention_(store, prefix + ".self_attn", config.d_model, config.heads, config.scaling, init),
      self_norm_(LayerNormParams<T>::make(store, prefix + ".self_norm", config.d_model,
                                          config.layer_norm_eps, init)),
      cross_attention_(store, prefix + ".cross_attn", config.d_model, config.heads, config.scaling,
                       init),
      cross_norm_(LayerNormParams<T>::make(store, prefix + ".cross_norm", config.d_model,
                                           config.layer_norm_eps, init)),
      feed_forward_(FeedForward<T>::make(store, prefix + ".ffn", config.d_model, config.d_ff, init)),
      feed_forward_norm_(LayerNormParams<T>::make(store, prefix + ".ffn_norm", config.d_model,
                                                  config.layer_norm_eps, init)) {}

template <typename T>
Var<T> DecoderLayer<T>::forward(Var<T> x, Var<T> memory, const Mask& causal) const {
  const double rate = config_->dropout;
  x = residual_block<T>(
      x, [&](Var<T> in) { return self_attention_.self_attention(in, nullptr, nullptr, &causal); },
      self_norm_, false, rate);
  x = residual_block<T>(
      x, [&](Var<T> in) { return cross_attention_.cross_attention(in, memory); }, cross_norm_,
      false, rate);
  return residual_block<T>(
      x, [&](Var<T> in) { return feed_forward_.apply(in); }, feed_forward_norm_, false, rate);
}

template <typename T>
Decoder<T>::Decoder(ParamStore<T>& store, DecoderConfig config, const Initializer& init,
                    const std::string& prefix)
    : config_(std::move(config)) {
  config_.validate();
  embedding_ = &store.add(prefix + ".embedding", {config_.vocab_size, config_.d_model});
  init.normal(*embedding_, 1.0 / std::sqrt(static_cast<double>(config_.d_model)));
  layers_.reserve(config_.layers);
  for (std::size_t k = 0; k < config_.layers; ++k) {
    layers_.emplace_back(store, prefix + ".layer" + std::to_string(k), config_, init);
  }
  output_weight_ = &store.add(prefix + ".out.weight", {config_.d_model, config_.vocab_size});
  output_bias_ = &store.add(prefix + ".out.bias", {config_.vocab_size});
  init.xavier(*output_weight_);
  init.constant(*output_bias_, 0.0);
}

template <typename T>
Var<T> Decoder<T>::logits(Graph<T>& graph, std::span<const std::size_t> ids, Var<T> memory) const {
  if (ids.empty()) throw std::invalid_argument("decoder input is empty");
  Var<T> x = embedding(graph.parameter(*embedding_), ids);
  if (config_.scale_embeddings) {
    x = scale(x, static_cast<T>(std::sqrt(static_cast<double>(config_.d_model))));
  }
  PositionAssignment positions;
  for (std::size_t k = 0; k < ids.size(); ++k) positions.positions.push_back(k + 1);
  x = add(x, graph.constant(positional_matrix<T>(positions, PositionalMode::lpe, config_.d_model)));
  x = dropout(x, config_.dropout);
  const Mask causal = Mask::causal(ids.size());
  for (const auto& layer : layers_) x = layer.forward(x, memory, causal);
  return add_row(matmul(x, graph.parameter(*output_weight_)), graph.parameter(*output_bias_));
}

template <typename T>
std::vector<std::size_t> Decoder<T>::greedy_decode(Var<T> memory, std::size_t bos, std::size_t eos,
                                                   std::size_t max_length) const {
  Graph<T>& graph = *memory.graph;
  std::vector<std::size_t> prefix{bos};
  std::vector<std::size_t> out;
  while (out.size() < max_length) {
    const Tensor<T>& scores = logits(graph, prefix, memory).value();
    const std::size_t last = scores.rows() - 1;
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols(); ++c) {
      if (scores(last, c) > scores(last, best)) best = c;
    }
    out.push_back(best);
    if (best == eos) break;
    prefix.push_back(best);
  }
  return out;
}

template class DecoderLayer<float>;
template class DecoderLayer<double>;
template class Decoder<float>;
template class Decoder<double>;

}  // namespace latticeformer
