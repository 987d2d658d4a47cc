#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latticeformer/attention.hpp"
#include "latticeformer/graph.hpp"
#include "latticeformer/init.hpp"
#include "latticeformer/lattice.hpp"
#include "latticeformer/positional.hpp"
#include "latticeformer/vocabulary.hpp"

namespace latticeformer {

struct EncoderConfig {
  std::size_t d_model = 32;
  std::size_t heads = 2;
  std::size_t layers = 2;
  std::size_t d_ff = 64;
  std::size_t vocab_size = 0;
  double dropout = 0.0;
  PositionalMode positional = PositionalMode::lpe;
  AttentionMode attention = AttentionMode::lsa;
  AttentionScaling scaling = AttentionScaling::head_dim;
  // Multiply embeddings by sqrt(d_model) before adding positions.
  bool scale_embeddings = true;
  // Sublayer order: post-norm is LN(x + f(x)); pre-norm is x + f(LN(x))
  // with a final LN.
  bool pre_norm = false;
  double layer_norm_eps = 1e-6;

  std::size_t head_dim() const noexcept { return heads == 0 ? 0 : d_model / heads; }
  // Throws std::invalid_argument.
  void validate() const;
};

// What the encoder consumes for one lattice: edge token ids in canonical
// order, their LPE positions, and the pairwise relation codes.
struct EncoderInput {
  std::vector<std::size_t> token_ids;
  PositionAssignment positions;
  RelationMatrix relations;

  std::size_t size() const noexcept { return token_ids.size(); }
};

EncoderInput make_encoder_input(const Lattice& lattice, const Vocabulary& vocab);

// Reorders edges: row k of the result is row order[k] of `input`. Each edge
// keeps its LPE position and its relations.
EncoderInput reorder_input(const EncoderInput& input, std::span<const std::size_t> order);

// Parameter totals by group, plus what each lattice mechanism adds over a
// vanilla encoder of the same shape.
struct ParamCount {
  std::size_t embedding = 0;
  std::size_t attention = 0;
  std::size_t feed_forward = 0;
  std::size_t layer_norm = 0;
  std::size_t relation_tables = 0;
  std::size_t total = 0;
  std::size_t lpe_delta = 0;
  std::size_t lsa_delta = 0;
};

ParamCount param_count(const EncoderConfig& config);

template <typename T>
struct LayerNormParams {
  Parameter<T>* gain = nullptr;
  Parameter<T>* bias = nullptr;
  double eps = 1e-6;

  static LayerNormParams make(ParamStore<T>& store, const std::string& prefix, std::size_t width,
                              double eps, const Initializer& init);
  Var<T> apply(Var<T> x) const;
};

// relu(x W1 + b1) W2 + b2
template <typename T>
struct FeedForward {
  Parameter<T>* w1 = nullptr;
  Parameter<T>* b1 = nullptr;
  Parameter<T>* w2 = nullptr;
  Parameter<T>* b2 = nullptr;

  static FeedForward make(ParamStore<T>& store, const std::string& prefix, std::size_t d_model,
                          std::size_t d_ff, const Initializer& init);
  Var<T> apply(Var<T> x) const;
};

// Wraps `sublayer` with dropout, a residual connection and layer norm in
// post- or pre-norm order.
template <typename T>
Var<T> residual_block(Var<T> x, const std::function<Var<T>(Var<T>)>& sublayer,
                      const LayerNormParams<T>& norm, bool pre_norm, double dropout_rate);

template <typename T>
class EncoderLayer {
 public:
  EncoderLayer(ParamStore<T>& store, const std::string& prefix, const EncoderConfig& config,
               const Initializer& init);

  Var<T> forward(Var<T> x, const RelationMatrix& relations) const;

  const MultiHeadAttention<T>& attention() const noexcept { return attention_; }
  // Present only in lattice-aware mode.
  const std::optional<RelationTables<T>>& relation_tables() const noexcept { return tables_; }

 private:
  const EncoderConfig* config_;
  MultiHeadAttention<T> attention_;
  std::optional<RelationTables<T>> tables_;
  LayerNormParams<T> attention_norm_;
  FeedForward<T> feed_forward_;
  LayerNormParams<T> feed_forward_norm_;
};

// Lattice-based Transformer encoder: edge embeddings plus positional
// encodings, then `layers` blocks of (lattice-aware) self-attention and a
// position-wise feed-forward network.
template <typename T>
class Encoder {
 public:
  // Parameters are registered as `<prefix>.embedding`, `<prefix>.layer<k>.*`.
  Encoder(ParamStore<T>& store, EncoderConfig config, const Initializer& init,
          const std::string& prefix = "encoder");
  Encoder(const Encoder&) = delete;
  Encoder& operator=(const Encoder&) = delete;

  // M x d hidden states, one row per edge in input order.
  Var<T> encode(Graph<T>& graph, const EncoderInput& input) const;

  const EncoderConfig& config() const noexcept { return config_; }
  const std::vector<EncoderLayer<T>>& layers() const noexcept { return layers_; }
  Parameter<T>& embedding_table() const noexcept { return *embedding_; }

 private:
  EncoderConfig config_;
  Parameter<T>* embedding_;
  std::vector<EncoderLayer<T>> layers_;
  std::optional<LayerNormParams<T>> final_norm_;
};

}  // namespace latticeformer
