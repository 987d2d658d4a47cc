#include "latticeformer/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "latticeformer/error.hpp"
#include "latticeformer/init.hpp"
#include "latticeformer/ops.hpp"
#include "latticeformer/toy_tasks.hpp"

namespace latticeformer {

namespace {

Vocabulary lattice_vocabulary(const Lattice& lattice) {
  std::map<std::string, std::size_t> counts;
  for (const Edge& e : lattice.edges) ++counts[e.surface];
  return Vocabulary::build(counts, 1, {std::string(kUnkToken)});
}

}  // namespace

GradCheckReport encoder_grad_check(EncoderConfig config, std::uint64_t seed,
                                   const GradCheckOptions& options) {
  const Lattice lattice = example_lattice();
  const Vocabulary vocab = lattice_vocabulary(lattice);
  config.vocab_size = vocab.size();
  config.dropout = 0.0;
  const EncoderInput input = make_encoder_input(lattice, vocab);

  ParamStore<double> store;
  const Initializer init(seed);
  const Encoder<double> encoder(store, config, init);
  // Relation tables start near zero; give every parameter O(1)-scale values
  // so each path contributes measurably to the checked gradient.
  for (auto& p : store) {
    if (p.name.find("rel_") != std::string::npos) init.uniform(p, 0.5);
  }

  Tensor<double> weights(input.size(), config.d_model);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& w : weights.values()) w = dist(rng);

  return grad_check(
      store,
      [&](Graph<double>& g) { return sum(hadamard(encoder.encode(g, input), g.constant(weights))); },
      options);
}

AblationMode parse_ablation_mode(std::string_view name) {
  AblationMode m;
  m.name = std::string(name);
  if (name == "pe") {
    m.positional = PositionalMode::flat_pe;
    m.attention = AttentionMode::vanilla;
  } else if (name == "lpe") {
    m.positional = PositionalMode::lpe;
    m.attention = AttentionMode::vanilla;
  } else if (name == "lsa") {
    m.positional = PositionalMode::none;
    m.attention = AttentionMode::lsa;
  } else if (name == "lpe+lsa") {
    m.positional = PositionalMode::lpe;
    m.attention = AttentionMode::lsa;
  } else if (name == "pe+lsa") {
    m.positional = PositionalMode::flat_pe;
    m.attention = AttentionMode::lsa;
  } else if (name == "shuffled") {
    m.positional = PositionalMode::lpe;
    m.attention = AttentionMode::lsa;
    m.shuffled_relations = true;
  } else if (name == "none") {
    m.positional = PositionalMode::none;
    m.attention = AttentionMode::vanilla;
  } else {
    throw InputError("unknown ablation mode '" + std::string(name) + "'");
  }
  return m;
}

std::vector<AblationMode> parse_ablation_modes(std::string_view text) {
  std::vector<AblationMode> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    if (item.empty()) throw InputError("empty ablation mode in '" + std::string(text) + "'");
    out.push_back(parse_ablation_mode(item));
    pos = comma + 1;
  }
  return out;
}

ExperimentConfig apply_ablation(ExperimentConfig config, const AblationMode& mode) {
  config.encoder.positional = mode.positional;
  config.encoder.attention = mode.attention;
  config.training.shuffled_relations = mode.shuffled_relations;
  return config;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-8s %-8s %-9s %10s %10s %9s %9s %8s\n", "mode",
                "pos", "attn", "relations", "params", "loss", "tok_acc", "exact", "steps/s");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %-8s %-8s %-9s %10zu %10.4f %9.4f %9.4f %8.2f\n",
                  r.mode.name.c_str(), std::string(to_string(r.mode.positional)).c_str(),
                  std::string(to_string(r.mode.attention)).c_str(),
                  r.mode.shuffled_relations ? "shuffled" : "true", r.params, r.final_loss,
                  r.eval.token_accuracy, r.eval.exact_match, r.steps_per_second);
    out << line;
  }
  return out.str();
}

double median_encoder_step_seconds(EncoderConfig config, std::size_t elements,
                                   std::size_t segmenters, std::size_t runs, std::uint64_t seed) {
  ToyTaskConfig task;
  task.kind = ToyTaskKind::copy;
  task.min_length = task.max_length = elements;
  task.segmenters = segmenters;
  task.train_size = 1;
  task.held_out_size = 0;
  task.seed = seed;
  const Lattice lattice = generate_toy_dataset(task).train.front().lattice;
  const Vocabulary vocab = lattice_vocabulary(lattice);
  config.vocab_size = vocab.size();
  config.dropout = 0.0;
  const EncoderInput input = make_encoder_input(lattice, vocab);

  ParamStore<float> store;
  const Encoder<float> encoder(store, config, Initializer(seed));
  Tensor<float> weights(input.size(), config.d_model);
  weights.fill(1.0f);

  std::vector<double> seconds;
  for (std::size_t r = 0; r < runs + 1; ++r) {
    const auto start = std::chrono::steady_clock::now();
    Graph<float> g;
    g.backward(sum(hadamard(encoder.encode(g, input), g.constant(weights))));
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    // The first run warms caches and is discarded.
    if (r > 0) seconds.push_back(elapsed.count());
  }
  std::sort(seconds.begin(), seconds.end());
  return seconds[seconds.size() / 2];
}

}  // namespace latticeformer
