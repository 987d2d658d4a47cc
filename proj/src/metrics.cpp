#include "latticeformer/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace latticeformer {

namespace {

void check_lists(std::span<const Sequence> predictions, std::span<const Sequence> references) {
  if (references.empty()) throw std::invalid_argument("empty reference set");
  if (predictions.size() != references.size()) {
    throw std::invalid_argument("prediction and reference counts differ");
  }
}

}  // namespace

double token_accuracy(std::span<const Sequence> predictions, std::span<const Sequence> references) {
  check_lists(predictions, references);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t k = 0; k < references.size(); ++k) {
    const Sequence& p = predictions[k];
    const Sequence& r = references[k];
    total += std::max(p.size(), r.size());
    const std::size_t overlap = std::min(p.size(), r.size());
    for (std::size_t i = 0; i < overlap; ++i) correct += p[i] == r[i] ? 1 : 0;
  }
  if (total == 0) return 1.0;
  return static_cast<double>(correct) / static_cast<double>(total);
}

double exact_match(std::span<const Sequence> predictions, std::span<const Sequence> references) {
  check_lists(predictions, references);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < references.size(); ++k) hits += predictions[k] == references[k] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(references.size());
}

}  // namespace latticeformer
