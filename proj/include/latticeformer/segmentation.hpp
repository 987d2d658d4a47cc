#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace latticeformer {

inline constexpr std::size_t kDefaultMaxElements = 512;

// The element sequence c_1..c_N a lattice is built over: unicode scalar
// values of a sentence with all whitespace removed. Node i of a lattice is
// the gap after element i, so node indices run over 0..N.
struct ElementSeq {
  std::u32string elements;
  // Sorted node indices where whitespace separated the raw sentence; always
  // contains 0 and N.
  std::vector<std::size_t> word_boundaries;

  std::size_t size() const noexcept { return elements.size(); }
  // UTF-8 text of the elements covered by nodes [start, end).
  std::string surface(std::size_t start, std::size_t end) const;
  std::string text() const { return surface(0, size()); }
  bool is_word_boundary(std::size_t node) const;

  friend bool operator==(const ElementSeq&, const ElementSeq&) = default;
};

// Strips whitespace from `sentence`; the whitespace positions become word
// boundaries. Throws InputError for an empty sentence or one longer than
// `max_elements`.
ElementSeq make_element_seq(std::string_view sentence,
                            std::size_t max_elements = kDefaultMaxElements);

struct Token {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  // Last token of a word. Kept out of the span so span indices stay
  // purely element based.
  bool end_of_word = false;

  friend bool operator==(const Token&, const Token&) = default;
};

// One segmentation of an element sequence. Spans tile [0, N].
struct TokenSeq {
  std::vector<Token> tokens;
  std::string source_id;

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

// Returns a description of every way `tokens` fails to tile `elements`
// (gaps, overlaps, surface mismatches). Empty when consistent.
std::vector<std::string> tiling_violations(const ElementSeq& elements, const TokenSeq& tokens);

// Concatenation of token surfaces, i.e. the whitespace-free sentence.
std::string joined_surface(const TokenSeq& tokens);

struct SegmentedSentence {
  ElementSeq elements;
  TokenSeq tokens;
};

// Parses one line of a segmentation file: tokens separated by single spaces.
SegmentedSentence parse_segmented_line(std::string_view line, std::string source_id,
                                       std::size_t max_elements = kDefaultMaxElements);

struct AlignedSegmentations {
  ElementSeq elements;
  std::vector<TokenSeq> segmentations;
  // Non-fatal notes, e.g. segmenters disagreeing on word boundaries.
  std::vector<std::string> warnings;
};

// Aligns several segmentations of the same sentence. All lines must reduce to
// the same element sequence; their word boundary sets are unioned.
AlignedSegmentations align_segmentations(std::span<const std::string> lines,
                                         std::span<const std::string> source_ids,
                                         std::size_t max_elements = kDefaultMaxElements);

// Reads line `line_index` (0-based) of every file and aligns them. Source ids
// are the file names.
AlignedSegmentations load_segmentations(std::span<const std::filesystem::path> paths,
                                        std::size_t line_index,
                                        std::size_t max_elements = kDefaultMaxElements);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace latticeformer
