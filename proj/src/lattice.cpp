#include "latticeformer/lattice.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

#include "latticeformer/error.hpp"

namespace latticeformer {

namespace {

constexpr std::array<std::string_view, kRelationCount> kCodes = {"lad", "rad", "inc", "ind",
                                                                 "its", "pre", "suc", "sel"};

std::string span_text(std::size_t start, std::size_t end) {
  return "(" + std::to_string(start) + "," + std::to_string(end) + ")";
}

}  // namespace

std::string_view relation_code(Relation r) noexcept { return kCodes[static_cast<std::size_t>(r)]; }

Relation parse_relation_code(std::string_view code) {
  for (std::size_t k = 0; k < kCodes.size(); ++k) {
    if (kCodes[k] == code) return static_cast<Relation>(k);
  }
  throw InputError("unknown relation code '" + std::string(code) + "'");
}

Relation converse(Relation r) noexcept {
  switch (r) {
    case Relation::lad: return Relation::rad;
    case Relation::rad: return Relation::lad;
    case Relation::inc: return Relation::ind;
    case Relation::ind: return Relation::inc;
    case Relation::pre: return Relation::suc;
    case Relation::suc: return Relation::pre;
    case Relation::its:
    case Relation::self: return r;
  }
  return r;
}

Relation classify_relation(Span a, Span b) {
  if (a.start >= a.end || b.start >= b.end) {
    throw std::invalid_argument("malformed span " + span_text(a.start, a.end) + " or " +
                                span_text(b.start, b.end));
  }
  if (a == b) return Relation::self;
  if (a.end == b.start) return Relation::lad;
  if (b.end == a.start) return Relation::rad;
  if (a.end < b.start) return Relation::pre;
  if (b.end < a.start) return Relation::suc;
  if (a.start <= b.start && b.end <= a.end) return Relation::inc;
  if (b.start <= a.start && a.end <= b.end) return Relation::ind;
  return Relation::its;
}

Lattice build_lattice(const ElementSeq& elements, std::span<const TokenSeq> segmentations) {
  std::map<Span, std::string> spans;
  for (const TokenSeq& seq : segmentations) {
    const auto problems = tiling_violations(elements, seq);
    if (!problems.empty()) {
      throw InputError("segmentation '" + seq.source_id + "' does not tile the sentence: " +
                       problems.front());
    }
    for (const Token& token : seq.tokens) {
      auto [it, inserted] = spans.emplace(Span{token.start, token.end}, token.surface);
      if (!inserted && it->second != token.surface) {
        throw InputError("span " + span_text(token.start, token.end) + " has surfaces '" +
                         it->second + "' and '" + token.surface + "'");
      }
    }
  }
  Lattice lattice;
  lattice.elements = elements;
  lattice.edges.reserve(spans.size());
  for (auto& [span, surface] : spans) {
    lattice.edges.push_back({span.start, span.end, surface, lattice.edges.size()});
  }
  return lattice;
}

RelationMatrix::RelationMatrix(std::size_t size, std::vector<Relation> codes)
    : size_(size), codes_(std::move(codes)) {
  if (codes_.size() != size_ * size_) throw std::invalid_argument("relation matrix is not square");
}

RelationMatrix RelationMatrix::reindexed(std::span<const std::size_t> order) const {
  if (order.size() != size_) throw std::invalid_argument("reindex order has wrong length");
  std::vector<Relation> codes(size_ * size_);
  for (std::size_t i = 0; i < size_; ++i) {
    for (std::size_t j = 0; j < size_; ++j) codes[i * size_ + j] = (*this)(order[i], order[j]);
  }
  return RelationMatrix(size_, std::move(codes));
}

RelationMatrix relation_matrix(const Lattice& lattice) {
  const std::size_t m = lattice.edge_count();
  std::vector<Relation> codes(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      codes[i * m + j] = classify_relation(lattice.edges[i].span(), lattice.edges[j].span());
    }
  }
  return RelationMatrix(m, std::move(codes));
}

std::vector<std::vector<std::size_t>> enumerate_paths(const Lattice& lattice,
                                                      std::size_t max_elements) {
  const std::size_t n = lattice.element_count();
  if (n > max_elements) {
    throw std::length_error("lattice has " + std::to_string(n) +
                            " elements; path enumeration is capped at " +
                            std::to_string(max_elements) + ", sample paths instead");
  }
  std::vector<std::vector<std::size_t>> outgoing(lattice.node_count());
  for (const Edge& e : lattice.edges) outgoing[e.start].push_back(e.id);

  std::vector<std::vector<std::size_t>> paths;
  std::vector<std::size_t> current;
  auto dfs = [&](auto&& self, std::size_t node) -> void {
    if (node == n) {
      paths.push_back(current);
      return;
    }
    for (std::size_t id : outgoing[node]) {
      current.push_back(id);
      self(self, lattice.edges[id].end);
      current.pop_back();
    }
  };
  dfs(dfs, 0);
  return paths;
}

double count_paths(const Lattice& lattice) {
  std::vector<double> ways(lattice.node_count(), 0.0);
  ways[0] = 1.0;
  // Canonical order visits edges by start node, so ways[start] is final.
  for (const Edge& e : lattice.edges) {
    if (e.end < ways.size()) ways[e.end] += ways[e.start];
  }
  return ways.back();
}

std::vector<Violation> validate(const Lattice& lattice) {
  std::vector<Violation> out;
  const std::size_t n = lattice.element_count();

  if (n == 0) out.push_back({"nonempty", "lattice has no elements"});
  if (lattice.elements.word_boundaries.empty() || lattice.elements.word_boundaries.front() != 0 ||
      lattice.elements.word_boundaries.back() != n) {
    out.push_back({"word boundaries", "must include 0 and N"});
  }
  if (lattice.edges.empty()) out.push_back({"connected", "lattice has no edges"});

  bool spans_ok = true;
  for (std::size_t k = 0; k < lattice.edges.size(); ++k) {
    const Edge& e = lattice.edges[k];
    const std::string name = "edge " + std::to_string(k) + " " + span_text(e.start, e.end);
    if (e.id != k) out.push_back({"dense edge ids", name + " has id " + std::to_string(e.id)});
    if (e.start >= e.end || e.end > n) {
      out.push_back({"span bounds", name + " violates 0 <= start < end <= N"});
      spans_ok = false;
      continue;
    }
    if (lattice.elements.surface(e.start, e.end) != e.surface) {
      out.push_back({"surface", name + " surface '" + e.surface + "' differs from its elements"});
    }
    if (k > 0) {
      const Edge& prev = lattice.edges[k - 1];
      if (prev.span() == e.span()) {
        out.push_back({"duplicate span", name});
      } else if (e.span() < prev.span()) {
        out.push_back({"canonical order", name + " precedes edge " + std::to_string(k - 1)});
      }
    }
  }
  if (!spans_ok || n == 0) return out;

  // Forward reachability from v_0 and backward co-reachability to v_N.
  std::vector<char> reach(n + 1, 0), coreach(n + 1, 0);
  reach[0] = 1;
  coreach[n] = 1;
  for (std::size_t node = 0; node <= n; ++node) {
    for (const Edge& e : lattice.edges) {
      if (e.start == node && reach[node]) reach[e.end] = 1;
    }
  }
  for (std::size_t node = n + 1; node-- > 0;) {
    for (const Edge& e : lattice.edges) {
      if (e.end == node && coreach[node]) coreach[e.start] = 1;
    }
  }
  for (const Edge& e : lattice.edges) {
    const std::string name = "edge " + std::to_string(e.id) + " " + span_text(e.start, e.end);
    if (!reach[e.start]) {
      out.push_back({"connected", name + " is not reachable from v_0 (node v_" +
                                      std::to_string(e.start) + " has no incoming path)"});
    }
    if (!coreach[e.end]) {
      out.push_back({"connected", name + " has no path to v_" + std::to_string(n) + " (node v_" +
                                      std::to_string(e.end) + " is a dead end)"});
    }
  }
  if (!reach[n]) out.push_back({"connected", "no complete path from v_0 to v_" + std::to_string(n)});
  return out;
}

}  // namespace latticeformer
