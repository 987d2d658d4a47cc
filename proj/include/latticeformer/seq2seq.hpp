#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "latticeformer/decoder.hpp"
#include "latticeformer/encoder.hpp"

namespace latticeformer {

// Lattice encoder plus a small standard decoder, sharing one parameter store.
template <typename T>
class Seq2SeqModel {
 public:
  Seq2SeqModel(const EncoderConfig& encoder, const DecoderConfig& decoder, std::uint64_t init_seed,
               std::size_t bos_id, std::size_t eos_id);

  // Summed teacher-forced cross-entropy over target + </s>.
  Var<T> loss(Graph<T>& graph, const EncoderInput& input, std::span<const std::size_t> target) const;

  // Decoded ids with a trailing </s> removed.
  std::vector<std::size_t> greedy_decode(const EncoderInput& input, std::size_t max_length) const;

  ParamStore<T>& params() noexcept { return *params_; }
  const ParamStore<T>& params() const noexcept { return *params_; }
  const Encoder<T>& encoder() const noexcept { return *encoder_; }
  const Decoder<T>& decoder() const noexcept { return *decoder_; }
  std::size_t bos() const noexcept { return bos_; }
  std::size_t eos() const noexcept { return eos_; }

 private:
  std::unique_ptr<ParamStore<T>> params_;
  std::unique_ptr<Encoder<T>> encoder_;
  std::unique_ptr<Decoder<T>> decoder_;
  std::size_t bos_;
  std::size_t eos_;
};

}  // namespace latticeformer
