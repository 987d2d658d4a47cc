#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "latticeformer/bpe.hpp"
#include "latticeformer/error.hpp"
#include "latticeformer/utf8.hpp"

using namespace latticeformer;

namespace {

// Adjacent character-pair counts of an unmerged corpus, by brute force.
std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts(
    const std::vector<WordCount>& corpus) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
  for (const auto& wc : corpus) {
    for (std::size_t i = 0; i + 1 < wc.word.size(); ++i) {
      counts[{wc.word.substr(i, 1), wc.word.substr(i + 1, 1)}] += wc.count;
    }
  }
  return counts;
}

std::vector<std::pair<std::size_t, std::size_t>> spans(const std::vector<Token>& tokens) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& t : tokens) out.emplace_back(t.start, t.end);
  return out;
}

}  // namespace

TEST_CASE("zero merges gives an empty table") {
  CHECK(learn_bpe({{"ab", 3}}, 0).merges.empty());
}

TEST_CASE("most frequent pair is merged first") {
  const auto table = learn_bpe({{"abab", 2}}, 1);
  REQUIRE(table.merge_count() == 1);
  CHECK(table.merges[0] == std::pair<std::string, std::string>{"a", "b"});
}

TEST_CASE("first merge on the low/lower/newest/widest corpus") {
  const std::vector<WordCount> corpus{{"low", 5}, {"lower", 2}, {"newest", 6}, {"widest", 3}};
  const auto counts = pair_counts(corpus);
  std::uint64_t best = 0;
  for (const auto& [pair, n] : counts) best = std::max(best, n);
  CHECK(best == 9);
  const auto table = learn_bpe(corpus, 1);
  REQUIRE(table.merge_count() == 1);
  CHECK(counts.at(table.merges[0]) == 9);
  // (e,s) and (s,t) both occur 9 times; the smaller pair wins.
  CHECK(table.merges[0] == std::pair<std::string, std::string>{"e", "s"});
}

TEST_CASE("learning is deterministic and merges are unique") {
  const std::vector<WordCount> corpus{{"low", 5}, {"lower", 2}, {"newest", 6}, {"widest", 3}};
  const auto a = learn_bpe(corpus, 50);
  const auto b = learn_bpe(corpus, 50);
  CHECK(a == b);
  std::set<std::pair<std::string, std::string>> seen(a.merges.begin(), a.merges.end());
  CHECK(seen.size() == a.merges.size());
  // Merges run out once every word is a single symbol.
  CHECK(a.merge_count() < 50);
}

TEST_CASE("empty corpus is rejected") {
  CHECK_THROWS_WITH(learn_bpe({}, 3), "empty corpus");
}

TEST_CASE("apply_bpe examples") {
  const MergeTable none;
  CHECK(spans(apply_bpe(U"abc", none)) ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {2, 3}});
  const MergeTable ab{{{"a", "b"}}};
  const auto abab = apply_bpe(U"abab", ab);
  CHECK(spans(abab) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}, {2, 4}});
  CHECK(abab[0].surface == "ab");
  CHECK_FALSE(abab[0].end_of_word);
  CHECK(abab[1].end_of_word);
  CHECK(spans(apply_bpe(U"aab", ab)) ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 3}});
}

TEST_CASE("merge priority follows table order") {
  // "abc": (b,c) ranks before (a,b), so b and c merge first.
  const MergeTable table{{{"b", "c"}, {"a", "b"}}};
  CHECK(spans(apply_bpe(U"abc", table)) ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 3}});
}

TEST_CASE("sentence segmentation never crosses a word boundary") {
  const MergeTable table{{{"a", "b"}}};
  const BpeSegmenter seg(table);
  const ElementSeq e = make_element_seq("a b ab");
  const TokenSeq tokens = seg.segment(e, "bpe");
  CHECK(tiling_violations(e, tokens).empty());
  for (const auto& t : tokens.tokens) {
    for (std::size_t node = t.start + 1; node < t.end; ++node) CHECK_FALSE(e.is_word_boundary(node));
  }
  CHECK(spans(tokens.tokens) ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {2, 4}});
}

TEST_CASE("merge table file round trip") {
  const MergeTable table{{{"a", "b"}, {"贸", "易"}, {"ab", "c"}}};
  const auto path = std::filesystem::temp_directory_path() / "lf_bpe_table.txt";
  write_merge_table(table, path);
  CHECK(read_merge_table(path) == table);
}
