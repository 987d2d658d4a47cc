#include "latticeformer/toy_tasks.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "latticeformer/error.hpp"
#include "latticeformer/lattice_io.hpp"
#include <json.hpp>

namespace latticeformer {

namespace {

constexpr std::size_t kMaxAttempts = 10000;
// Share of length-3 strings admitted to the disambiguation lexicon.
constexpr double kLongWordRate = 0.3;

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

TokenSeq make_token_seq(const std::string& text, const std::vector<std::size_t>& cuts,
                        std::string source_id) {
  TokenSeq seq;
  seq.source_id = std::move(source_id);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    seq.tokens.push_back({cuts[k], cuts[k + 1], text.substr(cuts[k], cuts[k + 1] - cuts[k]),
                          k + 2 == cuts.size()});
  }
  return seq;
}

// Random cut points with pieces of length 1..max_piece accepted by `allowed`.
template <typename Allowed>
std::vector<std::size_t> random_cuts(std::size_t n, std::size_t max_piece, std::mt19937_64& rng,
                                     Allowed allowed) {
  std::vector<std::size_t> cuts{0};
  std::size_t pos = 0;
  while (pos < n) {
    std::vector<std::size_t> options;
    for (std::size_t len = 1; len <= std::min(max_piece, n - pos); ++len) {
      if (allowed(pos, len)) options.push_back(len);
    }
    pos += options[uniform(rng, 0, options.size() - 1)];
    cuts.push_back(pos);
  }
  return cuts;
}

std::string random_text(std::size_t n, std::size_t alphabet, std::mt19937_64& rng) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + uniform(rng, 0, alphabet - 1)));
  return s;
}

TrainingExample copy_example(const ToyTaskConfig& config, std::mt19937_64& rng) {
  const std::size_t n = uniform(rng, config.min_length, config.max_length);
  const std::string text = random_text(n, config.alphabet_size, rng);
  const ElementSeq elements = make_element_seq(text);
  std::vector<TokenSeq> segs;
  std::vector<std::size_t> chars(n + 1);
  for (std::size_t i = 0; i <= n; ++i) chars[i] = i;
  segs.push_back(make_token_seq(text, chars, "seg0"));
  for (std::size_t s = 1; s < config.segmenters; ++s) {
    auto cuts = random_cuts(n, config.max_token_length, rng, [](std::size_t, std::size_t) { return true; });
    segs.push_back(make_token_seq(text, cuts, "seg" + std::to_string(s)));
  }
  TrainingExample ex;
  ex.lattice = build_lattice(elements, segs);
  for (char c : text) ex.target.emplace_back(1, c);
  return ex;
}

struct Lexicon {
  std::map<std::string, int> word_class;
  // by_shape[len - 1][class]: words of that length and class.
  std::vector<std::vector<std::vector<std::string>>> by_shape;
};

Lexicon make_lexicon(const ToyTaskConfig& config, std::mt19937_64& rng) {
  Lexicon lex;
  lex.by_shape.assign(config.max_token_length, std::vector<std::vector<std::string>>(2));
  std::vector<std::string> layer{""};
  for (std::size_t len = 1; len <= config.max_token_length; ++len) {
    std::vector<std::string> next;
    for (const auto& prefix : layer) {
      for (std::size_t c = 0; c < config.alphabet_size; ++c) next.push_back(prefix + char('a' + c));
    }
    for (const auto& w : next) {
      const bool admit = len <= 2 || std::bernoulli_distribution(kLongWordRate)(rng);
      const int cls = static_cast<int>(uniform(rng, 0, 1));
      if (!admit) continue;
      lex.word_class[w] = cls;
      lex.by_shape[len - 1][cls].push_back(w);
    }
    layer = std::move(next);
  }
  return lex;
}

// Edge keeps its class-alternation locally: it starts the sentence or has a
// left neighbour of the other class, and likewise on the right.
bool locally_alternating(const Lattice& lattice, const Edge& e, const Lexicon& lex) {
  const int cls = lex.word_class.at(e.surface);
  const std::size_t n = lattice.element_count();
  bool left = e.start == 0;
  bool right = e.end == n;
  for (const Edge& other : lattice.edges) {
    const int oc = lex.word_class.at(other.surface);
    if (oc == cls) continue;
    left = left || other.end == e.start;
    right = right || other.start == e.end;
  }
  return left && right;
}

bool try_disambiguate_example(const ToyTaskConfig& config, const Lexicon& lex,
                              std::mt19937_64& rng, TrainingExample& out) {
  const std::size_t n = uniform(rng, config.min_length, config.max_length);
  std::string text;
  std::vector<std::size_t> cuts{0};
  int cls = static_cast<int>(uniform(rng, 0, 1));
  while (text.size() < n) {
    std::vector<std::size_t> lengths;
    for (std::size_t len = 1; len <= std::min(config.max_token_length, n - text.size()); ++len) {
      if (!lex.by_shape[len - 1][cls].empty()) lengths.push_back(len);
    }
    if (lengths.empty()) return false;
    const auto& words = lex.by_shape[lengths[uniform(rng, 0, lengths.size() - 1)] - 1][cls];
    text += words[uniform(rng, 0, words.size() - 1)];
    cuts.push_back(text.size());
    cls ^= 1;
  }
  std::vector<TokenSeq> segs{make_token_seq(text, cuts, "seg0")};
  for (std::size_t s = 1; s < config.segmenters; ++s) {
    auto other = random_cuts(n, config.max_token_length, rng, [&](std::size_t pos, std::size_t len) {
      return lex.word_class.count(text.substr(pos, len)) != 0;
    });
    segs.push_back(make_token_seq(text, other, "seg" + std::to_string(s)));
  }
  // Present segmenters in random order so the true one is not always first.
  std::shuffle(segs.begin(), segs.end(), rng);
  Lattice lattice = build_lattice(make_element_seq(text), segs);

  std::set<std::pair<std::size_t, std::size_t>> truth;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) truth.insert({cuts[k], cuts[k + 1]});
  for (const Edge& e : lattice.edges) {
    const bool on_truth = truth.count({e.start, e.end}) != 0;
    if (locally_alternating(lattice, e, lex) != on_truth) return false;
  }
  out.lattice = std::move(lattice);
  out.target.assign(n, "I");
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) out.target[cuts[k]] = "B";
  return true;
}

}  // namespace

std::string_view to_string(ToyTaskKind kind) noexcept {
  return kind == ToyTaskKind::copy ? "copy" : "disambiguate";
}

ToyTaskKind parse_task_kind(std::string_view text) {
  if (text == "copy") return ToyTaskKind::copy;
  if (text == "disambiguate") return ToyTaskKind::disambiguate;
  throw InputError("unknown task '" + std::string(text) + "'");
}

void ToyTaskConfig::validate() const {
  if (alphabet_size < 2 || alphabet_size > 26) throw std::invalid_argument("alphabet_size must be in [2, 26]");
  if (min_length < 1 || max_length < min_length) throw std::invalid_argument("bad sentence length range");
  if (segmenters < 1) throw std::invalid_argument("segmenters must be at least 1");
  if (max_token_length < 1) throw std::invalid_argument("max_token_length must be at least 1");
  if (kind == ToyTaskKind::disambiguate && max_token_length < 2) {
    throw std::invalid_argument("disambiguate needs max_token_length >= 2");
  }
  if (train_size < 1) throw std::invalid_argument("train_size must be at least 1");
}

ToyDataset generate_toy_dataset(const ToyTaskConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  Lexicon lex;
  if (config.kind == ToyTaskKind::disambiguate) lex = make_lexicon(config, rng);

  auto generate = [&](std::size_t count) {
    std::vector<TrainingExample> out;
    out.reserve(count);
    while (out.size() < count) {
      if (config.kind == ToyTaskKind::copy) {
        out.push_back(copy_example(config, rng));
        continue;
      }
      TrainingExample ex;
      std::size_t attempts = 0;
      while (!try_disambiguate_example(config, lex, rng, ex)) {
        if (++attempts == kMaxAttempts) {
          throw std::runtime_error("disambiguate generator found no usable sentence");
        }
      }
      out.push_back(std::move(ex));
    }
    return out;
  };
  ToyDataset data;
  data.train = generate(config.train_size);
  data.held_out = generate(config.held_out_size);
  return data;
}

std::string dataset_to_jsonl(const std::vector<TrainingExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["lattice"] = nlohmann::ordered_json::parse(lattice_to_json(ex.lattice));
    j["target"] = ex.target;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Lattice example_lattice() {
  const ElementSeq elements = make_element_seq("贸易发展局副总裁");
  auto seg = [&](std::vector<std::size_t> cuts, std::string id) {
    TokenSeq seq;
    seq.source_id = std::move(id);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      seq.tokens.push_back({cuts[k], cuts[k + 1], elements.surface(cuts[k], cuts[k + 1]),
                            k + 2 == cuts.size()});
    }
    return seq;
  };
  const std::vector<TokenSeq> segs{seg({0, 2, 4, 5, 6, 8}, "a"), seg({0, 2, 5, 8}, "b"),
                                   seg({0, 2, 4, 5, 8}, "c")};
  return build_lattice(elements, segs);
}

}  // namespace latticeformer
