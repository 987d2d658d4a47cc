#include "latticeformer/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace latticeformer {

namespace {

double evaluate(const LossBuilder& loss) {
  Graph<double> graph;
  const double value = loss(graph).value().item();
  if (!std::isfinite(value)) throw std::domain_error("grad_check: loss is not finite");
  return value;
}

}  // namespace

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(ParamStore<double>& params, const LossBuilder& loss,
                           const GradCheckOptions& options) {
  params.zero_grad();
  {
    Graph<double> graph;
    Var<double> out = loss(graph);
    if (!std::isfinite(out.value().item())) throw std::domain_error("grad_check: loss is not finite");
    graph.backward(out);
  }

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (auto& p : params) {
    if (p.frozen) continue;
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    ParamGradError entry{p.name, 0.0, coords.size()};
    for (std::size_t c : coords) {
      const double original = p.value[c];
      p.value[c] = original + options.eps;
      const double plus = evaluate(loss);
      p.value[c] = original - options.eps;
      const double minus = evaluate(loss);
      p.value[c] = original;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      entry.max_rel_error = std::max(entry.max_rel_error, relative_error(p.grad[c], numeric));
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.params.push_back(std::move(entry));
  }
  params.zero_grad();
  return report;
}

}  // namespace latticeformer
