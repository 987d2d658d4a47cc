// Acceptance suite: one PASS/FAIL line per criterion. Criterion 8 is
// informational and never affects the exit code.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "latticeformer/attention.hpp"
#include "latticeformer/config.hpp"
#include "latticeformer/encoder.hpp"
#include "latticeformer/harness.hpp"
#include "latticeformer/lattice.hpp"
#include "latticeformer/positional.hpp"
#include "latticeformer/toy_tasks.hpp"
#include "latticeformer/trainer.hpp"
#include "reference_transformer.hpp"

namespace fs = std::filesystem;
using namespace latticeformer;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Interval conditions written out directly for (i, j) query and (p, q) key.
std::vector<Relation> conditions_holding(Span a, Span b) {
  const auto i = a.start, j = a.end, p = b.start, q = b.end;
  std::vector<Relation> out;
  if (i == p && j == q) {
    out.push_back(Relation::self);
    return out;
  }
  if (j == p) out.push_back(Relation::lad);
  if (q == i) out.push_back(Relation::rad);
  if (i <= p && q <= j) out.push_back(Relation::inc);
  if (p <= i && j <= q) out.push_back(Relation::ind);
  if ((i < p && p < j && j < q) || (p < i && i < q && q < j)) out.push_back(Relation::its);
  if (j < p) out.push_back(Relation::pre);
  if (q < i) out.push_back(Relation::suc);
  return out;
}

Outcome relation_oracle() {
  const auto t0 = Clock::now();
  std::size_t pairs = 0, bad = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<Span> spans;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j <= n; ++j) spans.push_back({i, j});
    }
    for (const Span a : spans) {
      for (const Span b : spans) {
        ++pairs;
        const Relation r = classify_relation(a, b);
        const auto holding = conditions_holding(a, b);
        if (holding.size() != 1 || holding[0] != r) ++bad;
        if (classify_relation(b, a) != converse(r)) ++bad;
        if ((a == b) != (r == Relation::self)) ++bad;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 1.0,
          std::to_string(pairs) + " ordered pairs, " + std::to_string(bad) + " disagreements, " +
              fmt("%.3f s", secs)};
}

Outcome parameter_count() {
  EncoderConfig c;
  c.d_model = 512;
  c.heads = 8;
  c.layers = 6;
  c.d_ff = 2048;
  c.vocab_size = 30000;
  c.positional = PositionalMode::lpe;
  c.attention = AttentionMode::lsa;
  const ParamCount full = param_count(c);
  EncoderConfig vanilla = c;
  vanilla.attention = AttentionMode::vanilla;
  vanilla.positional = PositionalMode::flat_pe;
  const std::size_t diff = full.total - param_count(vanilla).total;
  const bool ok = full.lsa_delta == 6144 && full.lpe_delta == 0 && diff == 6144;
  return {ok, "lsa delta " + std::to_string(full.lsa_delta) + ", lpe delta " +
                  std::to_string(full.lpe_delta) + ", total difference " + std::to_string(diff)};
}

Tensor<double> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor<double> t(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) t(i, j) = dist(rng);
  }
  return t;
}

Outcome zero_table_reduction() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> m_dist(1, 10), d_dist(1, 16),
      code(0, kRelationCount - 1);
  const std::size_t trials = 200;
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t m = m_dist(rng), dh = d_dist(rng);
    std::vector<Relation> codes(m * m);
    for (auto& c : codes) c = static_cast<Relation>(code(rng));
    const RelationMatrix rel(m, codes);
    Graph<double> g;
    const auto q = g.constant(random_matrix(m, dh, rng));
    const auto k = g.constant(random_matrix(m, dh, rng));
    const auto v = g.constant(random_matrix(m, dh, rng));
    const auto zero = g.constant(Tensor<double>(kRelationCount, dh));
    const double scale = 1.0 / std::sqrt(double(dh));
    const auto a = lattice_attention(q, k, v, rel, zero, zero, scale).value();
    const auto b = scaled_dot_attention(q, k, v, scale).value();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < dh; ++c) worst = std::max(worst, std::abs(a(i, c) - b(i, c)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-12 && secs < 10.0, std::to_string(trials) + " trials, max diff " +
                                            fmt("%.3g", worst) + ", " + fmt("%.2f s", secs)};
}

std::string random_text(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> letter(0, 5);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + letter(rng)));
  return s;
}

TokenSeq random_tiling(const ElementSeq& e, std::size_t max_len, std::mt19937_64& rng) {
  TokenSeq seq;
  std::size_t pos = 0;
  while (pos < e.size()) {
    std::uniform_int_distribution<std::size_t> len(1, std::min(max_len, e.size() - pos));
    const std::size_t end = pos + len(rng);
    seq.tokens.push_back({pos, end, e.surface(pos, end), end == e.size()});
    pos = end;
  }
  return seq;
}

Outcome lpe_monotonicity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> n_dist(1, 12), s_dist(1, 4), l_dist(1, 4);
  std::size_t paths = 0, violations = 0;
  for (std::size_t t = 0; t < 1000; ++t) {
    const ElementSeq e = make_element_seq(random_text(n_dist(rng), rng));
    std::vector<TokenSeq> segs(s_dist(rng));
    for (auto& s : segs) s = random_tiling(e, l_dist(rng), rng);
    const Lattice l = build_lattice(e, segs);
    const auto pos = lattice_positions(l).positions;
    for (const auto& path : enumerate_paths(l)) {
      ++paths;
      for (std::size_t k = 1; k < path.size(); ++k) {
        if (pos[path[k]] <= pos[path[k - 1]]) {
          ++violations;
          break;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 30.0,
          "1000 lattices, " + std::to_string(paths) + " paths, " + std::to_string(violations) +
              " violations, " + fmt("%.2f s", secs)};
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  EncoderConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.layers = 2;
  c.d_ff = 16;
  c.positional = PositionalMode::lpe;
  c.attention = AttentionMode::lsa;
  const GradCheckReport report = encoder_grad_check(c, 7);
  bool ok = !report.params.empty();
  std::string worst_name;
  double worst = 0.0;
  for (const auto& p : report.params) {
    if (!(p.max_rel_error < 1e-4)) ok = false;
    if (p.max_rel_error >= worst) {
      worst = p.max_rel_error;
      worst_name = p.name;
    }
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0, std::to_string(report.params.size()) + " groups, max rel error " +
                                  fmt("%.3g", worst) + " (" + worst_name + "), " +
                                  fmt("%.2f s", secs)};
}

Outcome chain_degeneration() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(6);
  const std::array<std::pair<std::size_t, std::size_t>, 6> shapes{
      {{4, 1}, {4, 2}, {8, 2}, {8, 4}, {12, 3}, {16, 4}}};
  std::uniform_int_distribution<std::size_t> shape_dist(0, shapes.size() - 1), layer_dist(1, 3),
      n_dist(1, 12), len_dist(1, 3), ff_dist(1, 3);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto [d, heads] = shapes[shape_dist(rng)];
    const ElementSeq e = make_element_seq(random_text(n_dist(rng), rng));
    const Lattice l = build_lattice(e, std::vector<TokenSeq>{random_tiling(e, len_dist(rng), rng)});
    std::map<std::string, std::size_t> counts;
    for (const auto& edge : l.edges) ++counts[edge.surface];
    const Vocabulary vocab = Vocabulary::build(counts, 1, {std::string(kUnkToken)});

    EncoderConfig c;
    c.d_model = d;
    c.heads = heads;
    c.layers = layer_dist(rng);
    c.d_ff = d * ff_dist(rng);
    c.vocab_size = vocab.size();
    c.positional = PositionalMode::flat_pe;
    c.attention = AttentionMode::vanilla;
    ParamStore<double> store;
    const Encoder<double> enc(store, c, Initializer(100 + t));
    const EncoderInput input = make_encoder_input(l, vocab);
    Graph<double> g;
    const auto h = enc.encode(g, input).value();
    std::vector<std::size_t> positions(input.size());
    std::iota(positions.begin(), positions.end(), 1);
    const auto expected = reference::encoder(
        store, {d, heads, c.layers, c.layer_norm_eps, c.scale_embeddings, false}, input.token_ids,
        positions);
    for (std::size_t i = 0; i < h.rows(); ++i) {
      for (std::size_t k = 0; k < d; ++k) worst = std::max(worst, std::abs(h(i, k) - expected[i][k]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 60.0,
          "20 configs, max diff " + fmt("%.3g", worst) + ", " + fmt("%.2f s", secs)};
}

Outcome toy_separation(const fs::path& configs) {
  const auto t0 = Clock::now();
  const ExperimentConfig base = load_config(configs / "disambiguate.json");
  auto run_mode = [&](const char* name) {
    Run run(apply_ablation(base, parse_ablation_mode(name)));
    run.train(base.training.steps);
    return run.evaluate_split("held-out").token_accuracy;
  };
  const double full = run_mode("lpe+lsa");
  const double shuffled = run_mode("shuffled");
  const double secs = seconds_since(t0);
  const bool ok = full >= 0.95 && full - shuffled >= 0.05 && secs < 600.0;
  return {ok, "lpe+lsa " + fmt("%.4f", full) + ", shuffled " + fmt("%.4f", shuffled) +
                  ", gap " + fmt("%.4f", full - shuffled) + ", " +
                  std::to_string(base.training.steps) + " steps, " + fmt("%.1f s", secs)};
}

Outcome throughput() {
  EncoderConfig c;
  c.d_model = 64;
  c.heads = 4;
  c.layers = 2;
  c.d_ff = 128;
  c.positional = PositionalMode::lpe;
  c.attention = AttentionMode::lsa;
  const double lattice = median_encoder_step_seconds(c, 24, 3, 20, 9);
  c.positional = PositionalMode::flat_pe;
  c.attention = AttentionMode::vanilla;
  const double vanilla = median_encoder_step_seconds(c, 24, 3, 20, 9);
  const double ratio = lattice / vanilla;
  return {ratio <= 4.0, "lsa+lpe " + fmt("%.3g s", lattice) + ", vanilla " +
                            fmt("%.3g s", vanilla) + ", ratio " + fmt("%.2f", ratio)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const fs::path& configs, const std::string& cli) {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "latticeformer_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::size_t steps = 300;
  for (const char* name : {"a", "b"}) {
    const std::string cmd = "\"" + cli + "\" train --task copy --config \"" +
                            (configs / "copy.json").string() + "\" --steps " +
                            std::to_string(steps) + " --seed 7 --out \"" + (root / name).string() +
                            "\" > \"" + (root / (std::string(name) + ".log")).string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "train command failed: " + cmd};
  }
  bool ok = true;
  std::string detail;
  for (const char* file : {"metrics.tsv", "params.bin"}) {
    const std::string a = slurp(root / "a" / file), b = slurp(root / "b" / file);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += std::string(file) + (same ? " identical (" : " DIFFER (") + std::to_string(a.size()) +
              " bytes), ";
  }
  fs::remove_all(root);
  return {ok, detail + std::to_string(steps) + " steps, " + fmt("%.1f s", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string configs = "configs";
  std::string cli;
  std::vector<int> only;
  app.add_option("--configs", configs, "Directory holding the experiment configs");
  app.add_option("--cli", cli, "Path to the latticeformer executable")->required();
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"relation oracle", relation_oracle},
      {"parameter count", parameter_count},
      {"zero-table reduction", zero_table_reduction},
      {"LPE monotonicity", lpe_monotonicity},
      {"gradient suite", gradient_suite},
      {"chain degeneration", chain_degeneration},
      {"toy-task separation", [&] { return toy_separation(configs); }},
      {"throughput (informational)", throughput},
      {"determinism", [&] { return determinism(configs, cli); }},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[k].first << ": "
              << o.detail << std::endl;
    if (!o.pass && id != 8) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
