#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latticeformer/attention.hpp"
#include "latticeformer/encoder.hpp"
#include "latticeformer/graph.hpp"
#include "latticeformer/init.hpp"

namespace latticeformer {

struct DecoderConfig {
  std::size_t d_model = 32;
  std::size_t heads = 2;
  std::size_t layers = 2;
  std::size_t d_ff = 64;
  std::size_t vocab_size = 0;
  double dropout = 0.0;
  AttentionScaling scaling = AttentionScaling::head_dim;
  bool scale_embeddings = true;
  double layer_norm_eps = 1e-6;

  void validate() const;
};

template <typename T>
class DecoderLayer {
 public:
  DecoderLayer(ParamStore<T>& store, const std::string& prefix, const DecoderConfig& config,
               const Initializer& init);

  Var<T> forward(Var<T> x, Var<T> memory, const Mask& causal) const;

 private:
  const DecoderConfig* config_;
  MultiHeadAttention<T> self_attention_;
  LayerNormParams<T> self_norm_;
  MultiHeadAttention<T> cross_attention_;
  LayerNormParams<T> cross_norm_;
  FeedForward<T> feed_forward_;
  LayerNormParams<T> feed_forward_norm_;
};

// Post-norm Transformer decoder over a sequence of target ids with causal
// self-attention and attention over the encoder memory.
template <typename T>
class Decoder {
 public:
  Decoder(ParamStore<T>& store, DecoderConfig config, const Initializer& init,
          const std::string& prefix = "decoder");
  Decoder(const Decoder&) = delete;
  Decoder& operator=(const Decoder&) = delete;

  // N x vocab logits for decoder inputs `ids` (N >= 1).
  Var<T> logits(Graph<T>& graph, std::span<const std::size_t> ids, Var<T> memory) const;

  // Greedy argmax decoding (lowest id wins ties) starting from `bos`.
  // The output excludes `bos` and ends with `eos` if it was produced within
  // `max_length` steps.
  std::vector<std::size_t> greedy_decode(Var<T> memory, std::size_t bos, std::size_t eos,
                                         std::size_t max_length) const;

  const DecoderConfig& config() const noexcept { return config_; }

 private:
  DecoderConfig config_;
  Parameter<T>* embedding_;
  std::vector<DecoderLayer<T>> layers_;
  Parameter<T>* output_weight_;
  Parameter<T>* output_bias_;
};

}  // namespace latticeformer
