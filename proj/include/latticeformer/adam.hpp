#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "latticeformer/graph.hpp"

namespace latticeformer {

struct LearningRateSchedule {
  enum class Kind { constant, inverse_sqrt };

  Kind kind = Kind::inverse_sqrt;
  // The rate itself for `constant`; a multiplier for `inverse_sqrt`.
  double learning_rate = 1.0;
  std::size_t warmup_steps = 400;
  std::size_t d_model = 512;

  // Rate for 1-based update `step`. inverse_sqrt is
  // lr * d_model^-0.5 * min(step^-0.5, step * warmup^-1.5).
  double rate(std::size_t step) const;
};

std::string_view to_string(LearningRateSchedule::Kind kind) noexcept;
LearningRateSchedule::Kind parse_schedule_kind(std::string_view text);

struct OptimizerConfig {
  LearningRateSchedule schedule;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  // Backward passes summed before one update.
  std::size_t accumulation_steps = 1;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

template <typename T>
struct AdamState {
  std::vector<T> first_moment;
  std::vector<T> second_moment;
};

// Bias-corrected Adam update of `params` in place; `step` is 1-based.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const OptimizerConfig& config, double learning_rate, std::size_t step);

// Adam over every non-frozen parameter of a store, with gradient
// accumulation: gradients from `accumulation_steps` calls are averaged into
// one update.
template <typename T>
class Adam {
 public:
  Adam(ParamStore<T>& params, OptimizerConfig config);

  // Returns true when this call applied an update (and zeroed gradients).
  bool step();

  std::size_t updates() const noexcept { return updates_; }
  double last_rate() const noexcept { return last_rate_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  ParamStore<T>* params_;
  OptimizerConfig config_;
  std::vector<AdamState<T>> states_;
  std::size_t pending_ = 0;
  std::size_t updates_ = 0;
  double last_rate_ = 0.0;
};

}  // namespace latticeformer
