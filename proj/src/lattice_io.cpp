#include "latticeformer/lattice_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "latticeformer/error.hpp"
#include "latticeformer/positional.hpp"
#include "latticeformer/utf8.hpp"

namespace latticeformer {

using ordered_json = nlohmann::ordered_json;

std::string lattice_to_json(const Lattice& lattice, const std::vector<std::size_t>* positions) {
  ordered_json j;
  j["elements"] = lattice.elements.text();
  const auto& bounds = lattice.elements.word_boundaries;
  if (bounds.size() > 2) j["word_boundaries"] = bounds;
  ordered_json edges = ordered_json::array();
  for (const Edge& e : lattice.edges) {
    ordered_json edge;
    edge["start"] = e.start;
    edge["end"] = e.end;
    edge["surface"] = e.surface;
    edges.push_back(std::move(edge));
  }
  j["edges"] = std::move(edges);
  if (positions != nullptr) j["positions"] = *positions;
  return j.dump();
}

Lattice lattice_from_json(std::string_view text) {
  Lattice lattice;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto elements = j.at("elements").get<std::string>();
    lattice.elements.elements = utf8::decode(elements);
    const std::size_t n = lattice.elements.size();
    if (j.contains("word_boundaries")) {
      lattice.elements.word_boundaries = j.at("word_boundaries").get<std::vector<std::size_t>>();
    } else {
      lattice.elements.word_boundaries = {0, n};
    }
    for (const auto& edge : j.at("edges")) {
      lattice.edges.push_back({edge.at("start").get<std::size_t>(),
                               edge.at("end").get<std::size_t>(),
                               edge.at("surface").get<std::string>(), lattice.edges.size()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed lattice JSON: ") + e.what());
  }
  return lattice;
}

void write_lattices(const std::vector<Lattice>& lattices, const std::filesystem::path& path,
                    bool with_positions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const Lattice& lattice : lattices) {
    if (with_positions) {
      const auto positions = lattice_positions(lattice).positions;
      out << lattice_to_json(lattice, &positions) << '\n';
    } else {
      out << lattice_to_json(lattice) << '\n';
    }
  }
}

std::vector<Lattice> read_lattices(const std::filesystem::path& path) {
  std::vector<Lattice> out;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    out.push_back(lattice_from_json(line));
  }
  return out;
}

std::string relation_matrix_csv(const RelationMatrix& matrix) {
  std::string out;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      if (j > 0) out += ',';
      out += relation_code(matrix(i, j));
    }
    out += '\n';
  }
  return out;
}

RelationMatrix relation_matrix_from_csv(std::string_view csv) {
  std::vector<Relation> codes;
  std::size_t rows = 0;
  std::istringstream in{std::string(csv)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) codes.push_back(parse_relation_code(cell));
  }
  if (codes.size() != rows * rows) throw InputError("relation matrix CSV is not square");
  return RelationMatrix(rows, std::move(codes));
}

}  // namespace latticeformer
