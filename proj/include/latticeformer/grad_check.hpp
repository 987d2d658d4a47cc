#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "latticeformer/graph.hpp"

namespace latticeformer {

struct GradCheckOptions {
  double eps = 1e-5;
  // Coordinates checked per parameter; 0 checks all of them. Above the cap a
  // seeded random sample is taken.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct ParamGradError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::vector<ParamGradError> params;
  double max_rel_error = 0.0;
};

// Builds the scalar loss on a fresh graph for the current parameter values.
using LossBuilder = std::function<Var<double>(Graph<double>&)>;

// Compares backward-pass gradients with central differences
// (f(x+eps) - f(x-eps)) / 2 eps, coordinate by coordinate, reporting
// |a - n| / max(|a|, |n|, 1e-8). Frozen parameters are skipped. Throws
// std::domain_error on a non-finite loss. Parameter gradients are left
// zeroed.
GradCheckReport grad_check(ParamStore<double>& params, const LossBuilder& loss,
                           const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric) noexcept;

}  // namespace latticeformer
