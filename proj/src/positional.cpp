#include "latticeformer/positional.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "latticeformer/error.hpp"

namespace latticeformer {

std::string_view to_string(PositionalMode mode) noexcept {
  switch (mode) {
    case PositionalMode::lpe: return "lpe";
    case PositionalMode::flat_pe: return "flat_pe";
    case PositionalMode::none: return "none";
  }
  return "none";
}

PositionalMode parse_positional_mode(std::string_view text) {
  if (text == "lpe") return PositionalMode::lpe;
  if (text == "flat_pe" || text == "pe") return PositionalMode::flat_pe;
  if (text == "none") return PositionalMode::none;
  throw InputError("unknown positional mode '" + std::string(text) + "'");
}

std::vector<double> sinusoid(std::size_t position, std::size_t d) {
  if (d % 2 != 0) throw std::invalid_argument("sinusoid: model dimension must be even");
  std::vector<double> out(d);
  const double pos = static_cast<double>(position);
  for (std::size_t i = 0; i < d / 2; ++i) {
    const double angle =
        pos / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d));
    out[2 * i] = std::sin(angle);
    out[2 * i + 1] = std::cos(angle);
  }
  return out;
}

PositionAssignment lattice_positions(const Lattice& lattice) {
  PositionAssignment out;
  out.positions.resize(lattice.edge_count());
  for (const Edge& e : lattice.edges) out.positions[e.id] = e.start + 1;
  return out;
}

template <typename T>
Tensor<T> positional_matrix(const PositionAssignment& assignment, PositionalMode mode,
                            std::size_t d) {
  const std::size_t m = assignment.positions.size();
  Tensor<T> out(m, d);
  if (mode == PositionalMode::none) return out;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t pos = mode == PositionalMode::lpe ? assignment.positions[k] : k + 1;
    const auto enc = sinusoid(pos, d);
    for (std::size_t c = 0; c < d; ++c) out(k, c) = static_cast<T>(enc[c]);
  }
  return out;
}

template <typename T>
Tensor<T> add_positions(const Tensor<T>& embeddings, const PositionAssignment& assignment,
                        PositionalMode mode) {
  if (embeddings.rows() != assignment.positions.size()) {
    throw std::invalid_argument("add_positions: one embedding row per edge is required");
  }
  Tensor<T> out = embeddings;
  const Tensor<T> enc = positional_matrix<T>(assignment, mode, embeddings.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += enc[i];
  return out;
}

template Tensor<float> positional_matrix<float>(const PositionAssignment&, PositionalMode,
                                                std::size_t);
template Tensor<double> positional_matrix<double>(const PositionAssignment&, PositionalMode,
                                                  std::size_t);
template Tensor<float> add_positions<float>(const Tensor<float>&, const PositionAssignment&,
                                            PositionalMode);
template Tensor<double> add_positions<double>(const Tensor<double>&, const PositionAssignment&,
                                              PositionalMode);

}  // namespace latticeformer
