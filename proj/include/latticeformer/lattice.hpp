#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latticeformer/segmentation.hpp"

namespace latticeformer {

// Pairwise relation between two lattice edges e_{i:j} (query) and e_{p:q}
// (key). The seven interval relations plus `self` for an edge paired with
// itself; the enumerator values index relation embedding tables.
enum class Relation : std::uint8_t {
  lad,   // i < j = p < q   left adjacent
  rad,   // p < q = i < j   right adjacent
  inc,   // i <= p < q <= j includes
  ind,   // p <= i < j <= q included in
  its,   // i < p < j < q or p < i < q < j   intersects
  pre,   // i < j < p < q   precedes
  suc,   // p < q < i < j   succeeds
  self,
};

inline constexpr std::size_t kRelationCount = 8;

// Three-letter code; `self` is "sel".
std::string_view relation_code(Relation r) noexcept;
Relation parse_relation_code(std::string_view code);
Relation converse(Relation r) noexcept;

// Half-open node interval: e_{i:j} covers elements c_{i+1}..c_j.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Throws std::invalid_argument if either span has start >= end.
Relation classify_relation(Span a, Span b);

struct Edge {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  // Index into the encoder input sequence t_1..t_M.
  std::size_t id = 0;

  Span span() const noexcept { return {start, end}; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Lattice {
  ElementSeq elements;
  // Canonical order: (start, end) ascending; edges[k].id == k.
  std::vector<Edge> edges;

  std::size_t element_count() const noexcept { return elements.size(); }
  std::size_t node_count() const noexcept { return elements.size() + 1; }
  std::size_t edge_count() const noexcept { return edges.size(); }
  friend bool operator==(const Lattice&, const Lattice&) = default;
};

// Deduplicated union of all segmentations' spans, in canonical order.
// Throws InputError if a segmentation does not tile `elements` or two inputs
// give one span different surfaces.
Lattice build_lattice(const ElementSeq& elements, std::span<const TokenSeq> segmentations);

// Row-major M x M table of relation codes, indexed by edge id.
class RelationMatrix {
 public:
  RelationMatrix() = default;
  RelationMatrix(std::size_t size, std::vector<Relation> codes);

  std::size_t size() const noexcept { return size_; }
  Relation operator()(std::size_t row, std::size_t col) const { return codes_[row * size_ + col]; }
  std::span<const Relation> codes() const noexcept { return codes_; }

  // Result(i, j) = this(order[i], order[j]).
  RelationMatrix reindexed(std::span<const std::size_t> order) const;

  friend bool operator==(const RelationMatrix&, const RelationMatrix&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<Relation> codes_;
};

RelationMatrix relation_matrix(const Lattice& lattice);

inline constexpr std::size_t kMaxEnumerationElements = 32;

// All complete v_0 -> v_N paths as edge-id sequences, in lexicographic edge
// order. Intended for tests and desk-scale checks; throws std::length_error
// above `max_elements`.
std::vector<std::vector<std::size_t>> enumerate_paths(
    const Lattice& lattice, std::size_t max_elements = kMaxEnumerationElements);

// Number of complete paths, by dynamic programming over nodes.
double count_paths(const Lattice& lattice);

struct Violation {
  std::string invariant;
  std::string detail;
  std::string message() const { return invariant + ": " + detail; }
};

// Checks every lattice invariant; an empty result means the lattice is valid.
std::vector<Violation> validate(const Lattice& lattice);

}  // namespace latticeformer
