#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "latticeformer/adam.hpp"
#include "latticeformer/decoder.hpp"
#include "latticeformer/encoder.hpp"
#include "latticeformer/toy_tasks.hpp"

namespace latticeformer {

struct TrainingConfig {
  std::size_t steps = 1000;
  // Examples per optimizer update.
  std::size_t batch_size = 32;
  // Held-out evaluation period in steps; 0 evaluates only at the end.
  std::size_t eval_every = 100;
  // Relation matrices of every sentence are reindexed by a fixed random
  // permutation of its edges (the shuffled-relation control).
  bool shuffled_relations = false;
};

// Everything a run depends on. The encoder's vocab_size and the decoder's
// shared fields are filled in from the data and the encoder section.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  EncoderConfig encoder;
  std::size_t decoder_layers = 1;
  std::size_t decoder_d_ff = 64;
  OptimizerConfig optimizer;
  ToyTaskConfig task;
  TrainingConfig training;

  DecoderConfig decoder(std::size_t vocab_size) const;
};

// Unknown keys and ill-typed values throw InputError.
ExperimentConfig config_from_json(std::string_view json);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace latticeformer
