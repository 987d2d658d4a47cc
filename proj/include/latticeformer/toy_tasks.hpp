#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "latticeformer/lattice.hpp"

namespace latticeformer {

enum class ToyTaskKind {
  // Target is the element sequence itself.
  copy,
  // Elements come from an ambiguous lexicon; the target tags each element
  // B or I according to the one segmentation whose tokens alternate
  // between the two lexicon classes.
  disambiguate,
};

std::string_view to_string(ToyTaskKind kind) noexcept;
ToyTaskKind parse_task_kind(std::string_view text);

struct ToyTaskConfig {
  ToyTaskKind kind = ToyTaskKind::copy;
  std::size_t alphabet_size = 6;
  std::size_t min_length = 4;
  std::size_t max_length = 8;
  // Segmentations unioned into each lattice. One gives chain lattices.
  std::size_t segmenters = 3;
  std::size_t max_token_length = 3;
  std::size_t train_size = 2000;
  std::size_t held_out_size = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainingExample {
  Lattice lattice;
  std::vector<std::string> target;
};

struct ToyDataset {
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> held_out;
};

// Deterministic in `config`.
ToyDataset generate_toy_dataset(const ToyTaskConfig& config);

// One JSON object per example ({"lattice":...,"target":[...]}), one per line.
std::string dataset_to_jsonl(const std::vector<TrainingExample>& examples);

// The 8-character lattice built from three segmentations of
// 贸易发展局副总裁: 7 edges, 4 complete paths.
Lattice example_lattice();

}  // namespace latticeformer
