#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "latticeformer/encoder.hpp"
#include "latticeformer/error.hpp"
#include "latticeformer/harness.hpp"
#include "latticeformer/toy_tasks.hpp"
#include "reference_transformer.hpp"

using namespace latticeformer;

namespace {

Vocabulary vocab_for(const std::vector<Lattice>& lattices) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : lattices) {
    for (const auto& e : l.edges) ++counts[e.surface];
  }
  return Vocabulary::build(counts, 1, {std::string(kUnkToken)});
}

EncoderConfig small(PositionalMode pos, AttentionMode attn, std::size_t vocab) {
  EncoderConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.layers = 2;
  c.d_ff = 16;
  c.vocab_size = vocab;
  c.positional = pos;
  c.attention = attn;
  return c;
}

Lattice chain(const std::string& text, const std::vector<std::size_t>& cuts) {
  const ElementSeq e = make_element_seq(text);
  TokenSeq seq;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    seq.tokens.push_back({cuts[k], cuts[k + 1], e.surface(cuts[k], cuts[k + 1]), k + 2 == cuts.size()});
  }
  return build_lattice(e, std::vector<TokenSeq>{seq});
}

}  // namespace

TEST_CASE("parameter deltas") {
  EncoderConfig big;
  big.d_model = 512;
  big.heads = 8;
  big.layers = 6;
  big.d_ff = 2048;
  big.vocab_size = 30000;
  const ParamCount c = param_count(big);
  CHECK(c.lsa_delta == 6144);
  CHECK(c.lpe_delta == 0);

  EncoderConfig tiny = small(PositionalMode::lpe, AttentionMode::lsa, 10);
  tiny.layers = 1;
  CHECK(param_count(tiny).lsa_delta == 64);

  EncoderConfig other = big;
  other.vocab_size = 7;
  other.d_ff = 3;
  CHECK(param_count(other).lsa_delta == 6144);
}

TEST_CASE("param_count matches the registered parameters") {
  for (auto attn : {AttentionMode::vanilla, AttentionMode::lsa}) {
    for (bool pre : {false, true}) {
      EncoderConfig c = small(PositionalMode::lpe, attn, 13);
      c.pre_norm = pre;
      ParamStore<double> store;
      const Encoder<double> enc(store, c, Initializer(1));
      CHECK(param_count(c).total == store.scalar_count());
    }
  }
  // LPE adds nothing over flat positions.
  ParamStore<double> a, b;
  const Encoder<double> ea(a, small(PositionalMode::lpe, AttentionMode::vanilla, 13), Initializer(1));
  const Encoder<double> eb(b, small(PositionalMode::flat_pe, AttentionMode::vanilla, 13), Initializer(1));
  CHECK(a.scalar_count() == b.scalar_count());
  ParamStore<double> s;
  const Encoder<double> es(s, small(PositionalMode::lpe, AttentionMode::lsa, 13), Initializer(1));
  CHECK(s.scalar_count() - a.scalar_count() == 2 * 2 * kRelationCount * 4);
}

TEST_CASE("config validation") {
  EncoderConfig c = small(PositionalMode::lpe, AttentionMode::lsa, 5);
  CHECK_NOTHROW(c.validate());
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small(PositionalMode::lpe, AttentionMode::lsa, 5);
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small(PositionalMode::lpe, AttentionMode::lsa, 0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("output has one row per edge") {
  const Lattice l = example_lattice();
  const Vocabulary vocab = vocab_for({l});
  const EncoderInput input = make_encoder_input(l, vocab);
  for (auto pos : {PositionalMode::lpe, PositionalMode::flat_pe, PositionalMode::none}) {
    for (auto attn : {AttentionMode::vanilla, AttentionMode::lsa}) {
      ParamStore<double> store;
      const Encoder<double> enc(store, small(pos, attn, vocab.size()), Initializer(2));
      Graph<double> g;
      const auto& h = enc.encode(g, input).value();
      CHECK(h.rows() == 7);
      CHECK(h.cols() == 8);
    }
  }
}

TEST_CASE("vocabulary misses") {
  const Lattice l = example_lattice();
  Vocabulary with_unk = vocab_for({chain("ab", {0, 1, 2})});
  const EncoderInput input = make_encoder_input(l, with_unk);
  for (std::size_t id : input.token_ids) CHECK(id == 0);
  Vocabulary bare;
  bare.add("a");
  CHECK_THROWS_AS(make_encoder_input(l, bare), InputError);
}

TEST_CASE("encoder output follows edge reordering") {
  const Lattice l = example_lattice();
  const Vocabulary vocab = vocab_for({l});
  const EncoderInput input = make_encoder_input(l, vocab);
  std::mt19937_64 rng(3);
  std::vector<std::size_t> pi(input.size());
  std::iota(pi.begin(), pi.end(), 0);
  std::shuffle(pi.begin(), pi.end(), rng);
  const EncoderInput permuted = reorder_input(input, pi);

  for (auto [pos, attn] : {std::pair{PositionalMode::lpe, AttentionMode::lsa},
                           std::pair{PositionalMode::lpe, AttentionMode::vanilla},
                           std::pair{PositionalMode::none, AttentionMode::lsa}}) {
    ParamStore<double> store;
    const Encoder<double> enc(store, small(pos, attn, vocab.size()), Initializer(4));
    for (auto& p : store) {
      if (p.name.find("rel_") != std::string::npos) Initializer(5).uniform(p, 0.5);
    }
    Graph<double> g;
    const auto h = enc.encode(g, input).value();
    const auto hp = enc.encode(g, permuted).value();
    for (std::size_t k = 0; k < pi.size(); ++k) {
      for (std::size_t c = 0; c < 8; ++c) CHECK(hp(k, c) == doctest::Approx(h(pi[k], c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("chain lattice with flat positions is a standard encoder") {
  const Lattice l = chain("abcab", {0, 1, 3, 4, 5});
  const Vocabulary vocab = vocab_for({l});
  const EncoderInput input = make_encoder_input(l, vocab);
  ParamStore<double> store;
  const EncoderConfig config = small(PositionalMode::flat_pe, AttentionMode::vanilla, vocab.size());
  const Encoder<double> enc(store, config, Initializer(6));
  Graph<double> g;
  const auto h = enc.encode(g, input).value();
  std::vector<std::size_t> positions(input.size());
  std::iota(positions.begin(), positions.end(), 1);
  const auto expected = reference::encoder(store, {8, 2, 2, config.layer_norm_eps, true, false},
                                           input.token_ids, positions);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t c = 0; c < 8; ++c) CHECK(std::abs(h(i, c) - expected[i][c]) < 1e-10);
  }
}

TEST_CASE("lattice encoder matches the oracle on the example lattice") {
  const Lattice l = example_lattice();
  const Vocabulary vocab = vocab_for({l});
  const EncoderInput input = make_encoder_input(l, vocab);
  ParamStore<double> store;
  const EncoderConfig config = small(PositionalMode::lpe, AttentionMode::lsa, vocab.size());
  const Encoder<double> enc(store, config, Initializer(7));
  for (auto& p : store) {
    if (p.name.find("rel_") != std::string::npos) Initializer(8).uniform(p, 0.5);
  }
  Graph<double> g;
  const auto h = enc.encode(g, input).value();
  std::vector<std::vector<int>> rel(7, std::vector<int>(7));
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) rel[i][j] = static_cast<int>(input.relations(i, j));
  }
  const auto expected = reference::encoder(store, {8, 2, 2, config.layer_norm_eps, true, true},
                                           input.token_ids, input.positions.positions, rel);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t c = 0; c < 8; ++c) CHECK(std::abs(h(i, c) - expected[i][c]) < 1e-10);
  }
}

TEST_CASE("zeroed relation tables on a chain reproduce the vanilla encoder") {
  const Lattice l = chain("abcab", {0, 2, 3, 5});
  const Vocabulary vocab = vocab_for({l});
  const EncoderInput input = make_encoder_input(l, vocab);
  ParamStore<double> lsa_store, vanilla_store;
  const Encoder<double> lsa(lsa_store, small(PositionalMode::lpe, AttentionMode::lsa, vocab.size()),
                            Initializer(9));
  const Encoder<double> vanilla(vanilla_store,
                                small(PositionalMode::lpe, AttentionMode::vanilla, vocab.size()),
                                Initializer(9));
  for (auto& p : lsa_store) {
    if (p.name.find("rel_") != std::string::npos) p.value.fill(0.0);
  }
  Graph<double> g;
  CHECK(lsa.encode(g, input).value() == vanilla.encode(g, input).value());
}

TEST_CASE("end-to-end gradient check over the example lattice") {
  EncoderConfig config = small(PositionalMode::lpe, AttentionMode::lsa, 0);
  const GradCheckReport report = encoder_grad_check(config, 7);
  std::size_t tables = 0;
  for (const auto& p : report.params) {
    CHECK_MESSAGE(p.max_rel_error < 1e-4, p.name);
    CHECK(p.checked > 0);
    if (p.name.find("rel_") != std::string::npos) ++tables;
  }
  CHECK(tables == 4);
  CHECK(report.params.size() == 29);

  config.pre_norm = true;
  CHECK(encoder_grad_check(config, 8).max_rel_error < 1e-4);
}

TEST_CASE("dropout only acts in training graphs") {
  const Lattice l = example_lattice();
  const Vocabulary vocab = vocab_for({l});
  const EncoderInput input = make_encoder_input(l, vocab);
  EncoderConfig c = small(PositionalMode::lpe, AttentionMode::lsa, vocab.size());
  c.dropout = 0.3;
  ParamStore<double> store;
  const Encoder<double> enc(store, c, Initializer(1));
  Graph<double> a, b;
  CHECK(enc.encode(a, input).value() == enc.encode(b, input).value());
  std::mt19937_64 rng(1);
  Graph<double> t(rng);
  CHECK_FALSE(enc.encode(t, input).value() == enc.encode(a, input).value());
}
