#include "latticeformer/seq2seq.hpp"

#include "latticeformer/init.hpp"
#include "latticeformer/ops.hpp"

namespace latticeformer {

template <typename T>
Seq2SeqModel<T>::Seq2SeqModel(const EncoderConfig& encoder, const DecoderConfig& decoder,
                              std::uint64_t init_seed, std::size_t bos_id, std::size_t eos_id)
    : params_(std::make_unique<ParamStore<T>>()), bos_(bos_id), eos_(eos_id) {
  const Initializer init(init_seed);
  encoder_ = std::make_unique<Encoder<T>>(*params_, encoder, init);
  decoder_ = std::make_unique<Decoder<T>>(*params_, decoder, init);
}

template <typename T>
Var<T> Seq2SeqModel<T>::loss(Graph<T>& graph, const EncoderInput& input,
                             std::span<const std::size_t> target) const {
  std::vector<std::size_t> inputs{bos_};
  inputs.insert(inputs.end(), target.begin(), target.end());
  std::vector<std::size_t> outputs(target.begin(), target.end());
  outputs.push_back(eos_);
  const Var<T> memory = encoder_->encode(graph, input);
  return cross_entropy_loss(decoder_->logits(graph, inputs, memory),
                            std::span<const std::size_t>(outputs));
}

template <typename T>
std::vector<std::size_t> Seq2SeqModel<T>::greedy_decode(const EncoderInput& input,
                                                        std::size_t max_length) const {
  Graph<T> graph;
  const Var<T> memory = encoder_->encode(graph, input);
  auto out = decoder_->greedy_decode(memory, bos_, eos_, max_length);
  if (!out.empty() && out.back() == eos_) out.pop_back();
  return out;
}

template class Seq2SeqModel<float>;
template class Seq2SeqModel<double>;

}  // namespace latticeformer
