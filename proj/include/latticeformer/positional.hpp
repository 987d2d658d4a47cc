#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "latticeformer/lattice.hpp"
#include "latticeformer/tensor.hpp"

namespace latticeformer {

enum class PositionalMode {
  lpe,      // each edge takes the position of its first element
  flat_pe,  // edges numbered 1..M in canonical order
  none,
};

std::string_view to_string(PositionalMode mode) noexcept;
PositionalMode parse_positional_mode(std::string_view text);

// Sinusoidal encoding: component 2i is sin(pos / 10000^(2i/d)), 2i+1 the
// matching cos. Throws std::invalid_argument for odd d.
std::vector<double> sinusoid(std::size_t position, std::size_t d);

// One 1-based position per edge id; edge e_{i:j} sits at i + 1.
struct PositionAssignment {
  std::vector<std::size_t> positions;
};

PositionAssignment lattice_positions(const Lattice& lattice);

// M x d matrix of the encodings `mode` adds to edge embeddings: rows of
// sinusoid(positions[k]) for lpe, sinusoid(k + 1) for flat_pe, zeros for none.
template <typename T>
Tensor<T> positional_matrix(const PositionAssignment& assignment, PositionalMode mode,
                            std::size_t d);

template <typename T>
Tensor<T> add_positions(const Tensor<T>& embeddings, const PositionAssignment& assignment,
                        PositionalMode mode);

}  // namespace latticeformer
