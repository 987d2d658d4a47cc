#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latticeformer/lattice.hpp"

namespace latticeformer {

// One-line JSON: {"elements": ..., "edges": [{"start","end","surface"}...]}.
// "word_boundaries" is written only when the sentence had interior
// whitespace; "positions" only when `positions` is given.
std::string lattice_to_json(const Lattice& lattice,
                            const std::vector<std::size_t>* positions = nullptr);

// Parses the JSON form. Structural problems throw InputError; lattice
// invariants are left to validate().
Lattice lattice_from_json(std::string_view json);

void write_lattices(const std::vector<Lattice>& lattices, const std::filesystem::path& path,
                    bool with_positions = false);
std::vector<Lattice> read_lattices(const std::filesystem::path& path);

// Rows of comma-separated three-letter codes, one row per edge.
std::string relation_matrix_csv(const RelationMatrix& matrix);
RelationMatrix relation_matrix_from_csv(std::string_view csv);

}  // namespace latticeformer
