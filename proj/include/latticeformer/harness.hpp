#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "latticeformer/config.hpp"
#include "latticeformer/encoder.hpp"
#include "latticeformer/grad_check.hpp"
#include "latticeformer/trainer.hpp"

namespace latticeformer {

// Encoder-only gradient check over example_lattice() at 64-bit. The loss is
// sum(H * R) for the encoder output H and a fixed random R drawn from
// `seed`; vocab_size is set from the lattice.
GradCheckReport encoder_grad_check(EncoderConfig config, std::uint64_t seed,
                                   const GradCheckOptions& options = {});

// One row of the ablation table.
struct AblationMode {
  std::string name;
  PositionalMode positional = PositionalMode::lpe;
  AttentionMode attention = AttentionMode::lsa;
  bool shuffled_relations = false;
};

// Known names: pe, lpe, lsa, lpe+lsa, pe+lsa, shuffled, none.
AblationMode parse_ablation_mode(std::string_view name);
std::vector<AblationMode> parse_ablation_modes(std::string_view comma_separated);
ExperimentConfig apply_ablation(ExperimentConfig config, const AblationMode& mode);

struct AblationRow {
  AblationMode mode;
  std::size_t params = 0;
  double final_loss = 0.0;
  EvalResult eval;
  double steps_per_second = 0.0;
};

std::string format_ablation_table(const std::vector<AblationRow>& rows);

// Median seconds of one forward+backward pass of a 32-bit encoder on a fixed
// lattice (`elements` elements, `segmenters` random segmentations).
double median_encoder_step_seconds(EncoderConfig config, std::size_t elements,
                                   std::size_t segmenters, std::size_t runs, std::uint64_t seed);

}  // namespace latticeformer
