#include "latticeformer/segmentation.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "latticeformer/error.hpp"
#include "latticeformer/utf8.hpp"

namespace latticeformer {

std::string ElementSeq::surface(std::size_t start, std::size_t end) const {
  return utf8::encode(std::u32string_view(elements).substr(start, end - start));
}

bool ElementSeq::is_word_boundary(std::size_t node) const {
  return std::binary_search(word_boundaries.begin(), word_boundaries.end(), node);
}

ElementSeq make_element_seq(std::string_view sentence, std::size_t max_elements) {
  ElementSeq seq;
  const std::u32string decoded = utf8::decode(sentence);
  seq.word_boundaries.push_back(0);
  for (char32_t c : decoded) {
    if (utf8::is_whitespace(c)) {
      if (seq.word_boundaries.back() != seq.elements.size()) {
        seq.word_boundaries.push_back(seq.elements.size());
      }
      continue;
    }
    seq.elements.push_back(c);
  }
  if (seq.elements.empty()) throw InputError("empty sentence");
  if (seq.elements.size() > max_elements) {
    throw InputError("sentence has " + std::to_string(seq.elements.size()) +
                     " elements, cap is " + std::to_string(max_elements));
  }
  if (seq.word_boundaries.back() != seq.elements.size()) {
    seq.word_boundaries.push_back(seq.elements.size());
  }
  return seq;
}

std::vector<std::string> tiling_violations(const ElementSeq& elements, const TokenSeq& tokens) {
  std::vector<std::string> out;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < tokens.tokens.size(); ++k) {
    const Token& t = tokens.tokens[k];
    const std::string where = "token " + std::to_string(k) + " (" + std::to_string(t.start) +
                              "," + std::to_string(t.end) + ")";
    if (t.start != cursor) out.push_back(where + " does not start where the previous token ended");
    if (t.start >= t.end) {
      out.push_back(where + " has an empty or reversed span");
    } else if (t.end > elements.size()) {
      out.push_back(where + " ends past the last element");
    } else if (elements.surface(t.start, t.end) != t.surface) {
      out.push_back(where + " surface '" + t.surface + "' differs from covered elements");
    }
    cursor = t.end;
  }
  if (cursor != elements.size()) out.push_back("tokens do not cover all elements");
  return out;
}

std::string joined_surface(const TokenSeq& tokens) {
  std::string out;
  for (const Token& t : tokens.tokens) out += t.surface;
  return out;
}

SegmentedSentence parse_segmented_line(std::string_view line, std::string source_id,
                                       std::size_t max_elements) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  SegmentedSentence result;
  result.elements = make_element_seq(line, max_elements);
  result.tokens.source_id = std::move(source_id);

  const std::u32string decoded = utf8::decode(line);
  std::size_t cursor = 0;
  std::size_t i = 0;
  while (i < decoded.size()) {
    if (decoded[i] == U' ') {
      // Separators are single spaces; a doubled space is an empty token.
      if (i == 0 || i + 1 == decoded.size() || decoded[i + 1] == U' ') {
        throw InputError("token not alignable to element boundaries: empty token in '" +
                         std::string(line) + "'");
      }
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < decoded.size() && decoded[j] != U' ') {
      if (utf8::is_whitespace(decoded[j])) {
        throw InputError("token not alignable to element boundaries: non-space whitespace in '" +
                         std::string(line) + "'");
      }
      ++j;
    }
    Token token;
    token.start = cursor;
    token.end = cursor + (j - i);
    token.surface = utf8::encode(std::u32string_view(decoded).substr(i, j - i));
    token.end_of_word = true;
    result.tokens.tokens.push_back(std::move(token));
    cursor += j - i;
    i = j;
  }
  return result;
}

AlignedSegmentations align_segmentations(std::span<const std::string> lines,
                                         std::span<const std::string> source_ids,
                                         std::size_t max_elements) {
  if (lines.empty()) throw InputError("no segmentations given");
  if (lines.size() != source_ids.size()) throw InputError("one source id per line is required");

  AlignedSegmentations out;
  std::set<std::size_t> boundaries;
  for (std::size_t s = 0; s < lines.size(); ++s) {
    SegmentedSentence parsed = parse_segmented_line(lines[s], source_ids[s], max_elements);
    if (s == 0) {
      out.elements = parsed.elements;
    } else {
      const std::u32string& a = out.elements.elements;
      const std::u32string& b = parsed.elements.elements;
      const auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
      if (ia != a.end() || ib != b.end()) {
        // Reported 1-based, matching element numbering c_1..c_N.
        const auto index = static_cast<std::size_t>(ia - a.begin()) + 1;
        throw InputError("element mismatch at index " + std::to_string(index) + " between " +
                         source_ids[0] + " and " + source_ids[s]);
      }
      if (parsed.elements.word_boundaries != out.elements.word_boundaries) {
        out.warnings.push_back("word boundaries of " + source_ids[s] + " differ from " +
                               source_ids[0] + "; using their union");
      }
    }
    boundaries.insert(parsed.elements.word_boundaries.begin(),
                      parsed.elements.word_boundaries.end());
    out.segmentations.push_back(std::move(parsed.tokens));
  }
  out.elements.word_boundaries.assign(boundaries.begin(), boundaries.end());
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

AlignedSegmentations load_segmentations(std::span<const std::filesystem::path> paths,
                                        std::size_t line_index, std::size_t max_elements) {
  std::vector<std::string> lines;
  std::vector<std::string> ids;
  for (const auto& path : paths) {
    std::vector<std::string> file_lines = read_lines(path);
    if (line_index >= file_lines.size()) {
      throw InputError(path.string() + " has only " + std::to_string(file_lines.size()) +
                       " lines, line " + std::to_string(line_index) + " requested");
    }
    lines.push_back(std::move(file_lines[line_index]));
    ids.push_back(path.filename().string());
  }
  return align_segmentations(lines, ids, max_elements);
}

}  // namespace latticeformer
