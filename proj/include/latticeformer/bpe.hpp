#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latticeformer/segmentation.hpp"

namespace latticeformer {

// Learned merge operations in priority order. Symbols are UTF-8 strings.
struct MergeTable {
  std::vector<std::pair<std::string, std::string>> merges;

  std::size_t merge_count() const noexcept { return merges.size(); }
  friend bool operator==(const MergeTable&, const MergeTable&) = default;
};

struct WordCount {
  std::string word;
  std::uint64_t count = 0;
};

// Learns up to `num_merges` merges. Each step merges the most frequent
// adjacent symbol pair; ties go to the lexicographically smallest
// (left, right). Stops early when no word has two symbols left.
MergeTable learn_bpe(const std::vector<WordCount>& corpus, std::size_t num_merges);

// Counts whitespace-separated words over all lines, sorted by word.
std::vector<WordCount> count_words(const std::vector<std::string>& lines);

class BpeSegmenter {
 public:
  explicit BpeSegmenter(MergeTable table);

  // Segments a single whitespace-free word. Spans are offset by `offset`
  // so they index into the enclosing sentence.
  std::vector<Token> segment_word(std::u32string_view word, std::size_t offset = 0) const;

  // Segments every word of `elements` independently; no token crosses a
  // word boundary.
  TokenSeq segment(const ElementSeq& elements, std::string source_id) const;

  const MergeTable& table() const noexcept { return table_; }

 private:
  MergeTable table_;
  std::map<std::pair<std::string, std::string>, std::size_t> rank_;
};

std::vector<Token> apply_bpe(std::u32string_view word, const MergeTable& table);

void write_merge_table(const MergeTable& table, const std::filesystem::path& path);
MergeTable read_merge_table(const std::filesystem::path& path);

}  // namespace latticeformer
