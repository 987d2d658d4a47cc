#include "latticeformer/bpe.hpp"

#include <fstream>
#include <limits>
#include <set>

#include "latticeformer/error.hpp"
#include "latticeformer/utf8.hpp"

namespace latticeformer {

namespace {

using Symbols = std::vector<std::string>;
using Pair = std::pair<std::string, std::string>;

Symbols split_chars(std::string_view word) {
  Symbols out;
  for (char32_t c : utf8::decode(word)) out.push_back(utf8::encode(c));
  return out;
}

void merge_in_place(Symbols& symbols, const Pair& pair) {
  Symbols merged;
  merged.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
      merged.push_back(symbols[i] + symbols[i + 1]);
      ++i;
    } else {
      merged.push_back(symbols[i]);
    }
  }
  symbols = std::move(merged);
}

}  // namespace

MergeTable learn_bpe(const std::vector<WordCount>& corpus, std::size_t num_merges) {
  if (corpus.empty()) throw InputError("empty corpus");

  std::map<std::string, std::uint64_t> types;
  for (const auto& entry : corpus) {
    if (entry.word.empty() || entry.count == 0) continue;
    types[entry.word] += entry.count;
  }
  if (types.empty()) throw InputError("empty corpus");

  std::vector<std::pair<Symbols, std::uint64_t>> words;
  for (const auto& [word, count] : types) words.emplace_back(split_chars(word), count);

  MergeTable table;
  std::set<Pair> seen;
  while (table.merges.size() < num_merges) {
    std::map<Pair, std::uint64_t> stats;
    for (const auto& [symbols, count] : words) {
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        stats[{symbols[i], symbols[i + 1]}] += count;
      }
    }
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    const Pair* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& [pair, count] : stats) {
      if (count > best_count && !seen.contains(pair)) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr) break;
    const Pair chosen = *best;
    seen.insert(chosen);
    table.merges.push_back(chosen);
    for (auto& [symbols, count] : words) merge_in_place(symbols, chosen);
  }
  return table;
}

std::vector<WordCount> count_words(const std::vector<std::string>& lines) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& line : lines) {
    std::u32string word;
    for (char32_t c : utf8::decode(line)) {
      if (utf8::is_whitespace(c)) {
        if (!word.empty()) ++counts[utf8::encode(word)];
        word.clear();
      } else {
        word.push_back(c);
      }
    }
    if (!word.empty()) ++counts[utf8::encode(word)];
  }
  std::vector<WordCount> out;
  for (auto& [word, count] : counts) out.push_back({word, count});
  return out;
}

BpeSegmenter::BpeSegmenter(MergeTable table) : table_(std::move(table)) {
  for (std::size_t r = 0; r < table_.merges.size(); ++r) rank_.emplace(table_.merges[r], r);
}

std::vector<Token> BpeSegmenter::segment_word(std::u32string_view word, std::size_t offset) const {
  std::vector<Token> tokens;
  tokens.reserve(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    tokens.push_back({offset + i, offset + i + 1, utf8::encode(word[i]), false});
  }

  while (tokens.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    const Pair* best = nullptr;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      auto it = rank_.find({tokens[i].surface, tokens[i + 1].surface});
      if (it != rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = &it->first;
      }
    }
    if (best == nullptr) break;
    std::vector<Token> merged;
    merged.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i + 1 < tokens.size() && tokens[i].surface == best->first &&
          tokens[i + 1].surface == best->second) {
        merged.push_back({tokens[i].start, tokens[i + 1].end,
                          tokens[i].surface + tokens[i + 1].surface, false});
        ++i;
      } else {
        merged.push_back(std::move(tokens[i]));
      }
    }
    tokens = std::move(merged);
  }
  if (!tokens.empty()) tokens.back().end_of_word = true;
  return tokens;
}

TokenSeq BpeSegmenter::segment(const ElementSeq& elements, std::string source_id) const {
  TokenSeq out;
  out.source_id = std::move(source_id);
  const auto& bounds = elements.word_boundaries;
  for (std::size_t w = 0; w + 1 < bounds.size(); ++w) {
    const std::size_t start = bounds[w];
    const std::size_t end = bounds[w + 1];
    auto word_tokens =
        segment_word(std::u32string_view(elements.elements).substr(start, end - start), start);
    for (auto& t : word_tokens) out.tokens.push_back(std::move(t));
  }
  return out;
}

std::vector<Token> apply_bpe(std::u32string_view word, const MergeTable& table) {
  return BpeSegmenter(table).segment_word(word);
}

void write_merge_table(const MergeTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& [left, right] : table.merges) out << left << '\t' << right << '\n';
}

MergeTable read_merge_table(const std::filesystem::path& path) {
  MergeTable table;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(line_no) +
                       ": expected LEFT<TAB>RIGHT");
    }
    table.merges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return table;
}

}  // namespace latticeformer
