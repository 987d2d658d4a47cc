#include "latticeformer/adam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "latticeformer/error.hpp"

namespace latticeformer {

double LearningRateSchedule::rate(std::size_t step) const {
  if (kind == Kind::constant) return learning_rate;
  const double s = static_cast<double>(std::max<std::size_t>(step, 1));
  const double warmup = static_cast<double>(std::max<std::size_t>(warmup_steps, 1));
  return learning_rate / std::sqrt(static_cast<double>(d_model)) *
         std::min(1.0 / std::sqrt(s), s / (warmup * std::sqrt(warmup)));
}

std::string_view to_string(LearningRateSchedule::Kind kind) noexcept {
  return kind == LearningRateSchedule::Kind::constant ? "constant" : "inverse_sqrt";
}

LearningRateSchedule::Kind parse_schedule_kind(std::string_view text) {
  if (text == "constant") return LearningRateSchedule::Kind::constant;
  if (text == "inverse_sqrt" || text == "noam") return LearningRateSchedule::Kind::inverse_sqrt;
  throw InputError("unknown learning rate schedule '" + std::string(text) + "'");
}

void OptimizerConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (accumulation_steps == 0) throw std::invalid_argument("accumulation_steps must be >= 1");
  if (!(schedule.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const OptimizerConfig& config, double learning_rate, std::size_t step) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (step == 0) throw std::invalid_argument("adam_step: step is 1-based");
  if (state.first_moment.size() != params.size()) {
    state.first_moment.assign(params.size(), T(0));
    state.second_moment.assign(params.size(), T(0));
  }
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = b1 * state.first_moment[i] + (1.0 - b1) * g;
    const double v = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
    state.first_moment[i] = static_cast<T>(m);
    state.second_moment[i] = static_cast<T>(v);
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] = static_cast<T>(params[i] - learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon));
  }
}

template <typename T>
Adam<T>::Adam(ParamStore<T>& params, OptimizerConfig config)
    : params_(&params), config_(config), states_(params.size()) {
  config_.validate();
}

template <typename T>
bool Adam<T>::step() {
  if (++pending_ < config_.accumulation_steps) return false;
  pending_ = 0;
  ++updates_;
  last_rate_ = config_.schedule.rate(updates_);
  const T inv = T(1) / static_cast<T>(config_.accumulation_steps);
  std::size_t k = 0;
  for (auto& p : *params_) {
    if (!p.frozen) {
      if (config_.accumulation_steps > 1) {
        for (auto& g : p.grad.values()) g *= inv;
      }
      adam_step<T>(p.value.values(), p.grad.values(), states_[k], config_, last_rate_, updates_);
    }
    ++k;
  }
  params_->zero_grad();
  return true;
}

template void adam_step<float>(std::span<float>, std::span<const float>, AdamState<float>&,
                               const OptimizerConfig&, double, std::size_t);
template void adam_step<double>(std::span<double>, std::span<const double>, AdamState<double>&,
                                const OptimizerConfig&, double, std::size_t);
template class Adam<float>;
template class Adam<double>;

}  // namespace latticeformer
