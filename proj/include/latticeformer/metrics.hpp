#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace latticeformer {

using Sequence = std::vector<std::size_t>;

// Corpus-level per-position match rate. Each pair contributes
// max(|pred|, |ref|) positions; positions beyond the shorter sequence count
// as wrong. Throws std::invalid_argument for an empty reference set or
// mismatched list lengths.
double token_accuracy(std::span<const Sequence> predictions, std::span<const Sequence> references);

// Fraction of pairs that match exactly.
double exact_match(std::span<const Sequence> predictions, std::span<const Sequence> references);

}  // namespace latticeformer
