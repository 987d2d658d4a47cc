#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "latticeformer/config.hpp"
#include "latticeformer/decoder.hpp"
#include "latticeformer/error.hpp"
#include "latticeformer/harness.hpp"
#include "latticeformer/metrics.hpp"
#include "latticeformer/toy_tasks.hpp"
#include "latticeformer/trainer.hpp"

using namespace latticeformer;

namespace {

const std::filesystem::path kConfigs = LATTICEFORMER_CONFIG_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig tiny_copy() {
  ExperimentConfig c = load_config(kConfigs / "copy.json");
  c.task.train_size = 64;
  c.task.held_out_size = 16;
  c.training.batch_size = 8;
  c.training.eval_every = 5;
  return c;
}

}  // namespace

TEST_CASE("token accuracy") {
  const std::vector<Sequence> ab{{1, 2}};
  CHECK(token_accuracy(ab, ab) == 1.0);
  CHECK(token_accuracy(std::vector<Sequence>{{1, 2}}, std::vector<Sequence>{{1, 3}}) == 0.5);
  CHECK(token_accuracy(std::vector<Sequence>{{1}}, std::vector<Sequence>{{1, 2}}) == 0.5);
  CHECK(token_accuracy(std::vector<Sequence>{{1, 2, 3}}, std::vector<Sequence>{{1}}) ==
        doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(token_accuracy(std::vector<Sequence>{}, std::vector<Sequence>{}), std::invalid_argument);
  CHECK_THROWS_AS(token_accuracy(ab, std::vector<Sequence>{{1}, {2}}), std::invalid_argument);
  CHECK(exact_match(std::vector<Sequence>{{1, 2}, {3}}, std::vector<Sequence>{{1, 2}, {4}}) == 0.5);
}

TEST_CASE("greedy decoding with uniform logits repeats the lowest id") {
  ParamStore<double> store;
  DecoderConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.layers = 1;
  c.d_ff = 8;
  c.vocab_size = 5;
  const Decoder<double> dec(store, c, Initializer(1));
  store.at("decoder.out.weight").value.fill(0.0);
  Graph<double> g;
  const auto memory = g.constant(Tensor<double>(3, 8, 0.5));
  CHECK(dec.greedy_decode(memory, 1, 2, 4) == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(dec.greedy_decode(memory, 1, 2, 1).size() == 1);
  // The end symbol stops decoding and is kept.
  store.at("decoder.out.bias").value[2] = 1.0;
  CHECK(dec.greedy_decode(memory, 1, 2, 4) == std::vector<std::size_t>{2});
}

TEST_CASE("copy dataset targets are the element sequence") {
  ToyTaskConfig c;
  c.alphabet_size = 2;
  c.min_length = c.max_length = 2;
  c.seed = 7;
  c.train_size = 20;
  c.held_out_size = 5;
  const ToyDataset d = generate_toy_dataset(c);
  REQUIRE(d.train.size() == 20);
  REQUIRE(d.held_out.size() == 5);
  for (const auto& ex : d.train) {
    std::string joined;
    for (const auto& t : ex.target) joined += t;
    CHECK(joined == ex.lattice.elements.text());
    CHECK(validate(ex.lattice).empty());
  }
}

TEST_CASE("disambiguation dataset") {
  ToyTaskConfig c = load_config(kConfigs / "disambiguate.json").task;
  c.train_size = 300;
  c.held_out_size = 20;
  const ToyDataset a = generate_toy_dataset(c);
  const ToyDataset b = generate_toy_dataset(c);
  CHECK(dataset_to_jsonl(a.train) == dataset_to_jsonl(b.train));
  CHECK(dataset_to_jsonl(a.held_out) == dataset_to_jsonl(b.held_out));

  std::map<std::string, std::set<bool>> on_path;
  std::size_t multi_path = 0;
  for (const auto& ex : a.train) {
    const Lattice& l = ex.lattice;
    CHECK(validate(l).empty());
    REQUIRE(ex.target.size() == l.element_count());
    CHECK(ex.target[0] == "B");
    // The B tags spell out a complete path of lattice edges.
    std::vector<std::size_t> cuts;
    for (std::size_t i = 0; i < ex.target.size(); ++i) {
      if (ex.target[i] == "B") cuts.push_back(i);
    }
    cuts.push_back(l.element_count());
    std::set<std::pair<std::size_t, std::size_t>> truth;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) truth.insert({cuts[k], cuts[k + 1]});
    std::size_t found = 0;
    for (const auto& e : l.edges) {
      const bool on = truth.count({e.start, e.end}) != 0;
      found += on ? 1 : 0;
      on_path[e.surface].insert(on);
    }
    CHECK(found == truth.size());
    multi_path += count_paths(l) > 1.0 ? 1 : 0;
  }
  CHECK(multi_path > a.train.size() / 2);
  // Surfaces are ambiguous: many appear both on and off the tagged path.
  std::size_t ambiguous = 0;
  for (const auto& [surface, seen] : on_path) ambiguous += seen.size() == 2 ? 1 : 0;
  CHECK(ambiguous > on_path.size() / 4);

  c.segmenters = 1;
  for (const auto& ex : generate_toy_dataset(c).train) CHECK(count_paths(ex.lattice) == 1.0);
}

TEST_CASE("experiment config parsing") {
  const ExperimentConfig c = load_config(kConfigs / "disambiguate.json");
  CHECK(c.task.kind == ToyTaskKind::disambiguate);
  CHECK(c.optimizer.schedule.d_model == c.encoder.d_model);
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
  CHECK(config_from_json("{}").encoder.d_model == 32);
  CHECK_THROWS_AS(config_from_json("{\"encoder\": {\"dmodel\": 8}}"), InputError);
  CHECK_THROWS_AS(config_from_json("{\"encoder\": {\"d_model\": \"8\"}}"), InputError);
  CHECK_THROWS_AS(config_from_json("{\"extra\": 1}"), InputError);
  CHECK_THROWS_AS(config_from_json("{\"optimizer\": {\"beta2\": 1.5}}"), InputError);
  CHECK_THROWS_AS(config_from_json("{"), InputError);
  CHECK_THROWS_AS(config_from_json("{\"encoder\": {\"attention\": \"global\"}}"), InputError);
}

TEST_CASE("ablation modes") {
  const auto modes = parse_ablation_modes("pe,lpe,lsa,lpe+lsa,pe+lsa,shuffled,none");
  REQUIRE(modes.size() == 7);
  CHECK(modes[0].positional == PositionalMode::flat_pe);
  CHECK(modes[0].attention == AttentionMode::vanilla);
  CHECK(modes[2].positional == PositionalMode::none);
  CHECK(modes[2].attention == AttentionMode::lsa);
  CHECK(modes[5].shuffled_relations);
  CHECK_THROWS_AS(parse_ablation_modes("lpe,,lsa"), InputError);
  CHECK_THROWS_AS(parse_ablation_mode("bogus"), InputError);
}

TEST_CASE("zero training steps leave the initialization") {
  const auto dir = std::filesystem::temp_directory_path() / "lf_zero_steps";
  std::filesystem::remove_all(dir);
  Run run(tiny_copy());
  run.train(0);
  run.save(dir);
  Run fresh(tiny_copy());
  const auto other = std::filesystem::temp_directory_path() / "lf_zero_steps_b";
  fresh.save(other);
  CHECK(slurp(dir / "params.bin") == slurp(other / "params.bin"));
  CHECK(slurp(dir / "metrics.tsv") == "step\tloss\ttoken_accuracy\texact_match\n");
}

TEST_CASE("training is deterministic and checkpoints reload") {
  const auto a = std::filesystem::temp_directory_path() / "lf_det_a";
  const auto b = std::filesystem::temp_directory_path() / "lf_det_b";
  for (const auto& dir : {a, b}) {
    std::filesystem::remove_all(dir);
    Run run(tiny_copy());
    run.train(12);
    run.save(dir);
  }
  CHECK(slurp(a / "metrics.tsv") == slurp(b / "metrics.tsv"));
  CHECK(slurp(a / "params.bin") == slurp(b / "params.bin"));
  CHECK(slurp(a / "config.json") == slurp(b / "config.json"));

  Run original(tiny_copy());
  original.train(12);
  const auto reloaded = Run::load(a);
  const EvalResult x = original.evaluate_split("held-out");
  const EvalResult y = reloaded->evaluate_split("held-out");
  CHECK(x.token_accuracy == y.token_accuracy);
  CHECK(x.exact_match == y.exact_match);
  CHECK(reloaded->config().training.steps == 12);
  CHECK_THROWS_AS(reloaded->evaluate_split("dev"), InputError);
}

TEST_CASE("shuffled and true relations start from the same parameters") {
  ExperimentConfig c = load_config(kConfigs / "disambiguate.json");
  c.task.train_size = 20;
  c.task.held_out_size = 4;
  Run truth(c);
  c.training.shuffled_relations = true;
  Run shuffled(c);
  auto it = shuffled.model().params().begin();
  for (const auto& p : truth.model().params()) {
    CHECK(p.name == it->name);
    CHECK(p.value == it->value);
    ++it;
  }
  bool any_differs = false;
  for (std::size_t k = 0; k < truth.train_examples().size(); ++k) {
    const auto& t = truth.train_examples()[k].input;
    const auto& s = shuffled.train_examples()[k].input;
    CHECK(t.token_ids == s.token_ids);
    CHECK(t.positions.positions == s.positions.positions);
    any_differs = any_differs || !(t.relations == s.relations);
  }
  CHECK(any_differs);
}

TEST_CASE("copy training lowers the loss and learns to copy") {
  ExperimentConfig c = load_config(kConfigs / "copy.json");
  c.training.eval_every = 0;
  Run run(c);
  run.train(1000);
  const auto& trace = run.trace();
  REQUIRE(trace.size() == 1000);
  double previous = 0.0;
  for (std::size_t w = 0; w < 10; ++w) {
    double mean = 0.0;
    for (std::size_t k = w * 100; k < (w + 1) * 100; ++k) mean += trace[k].loss / 100.0;
    if (w > 0) CHECK_MESSAGE(mean <= previous * 1.05, "window " << w);
    previous = mean;
  }
  CHECK(trace.back().eval.token_accuracy >= 0.99);

  // A two-element chain decodes to its elements followed by </s>.
  const ElementSeq e = make_element_seq("ab");
  TokenSeq seq{{{0, 1, "a", false}, {1, 2, "b", true}}, "s"};
  const Lattice chain = build_lattice(e, std::vector<TokenSeq>{seq});
  const EncoderInput input = make_encoder_input(chain, run.vocab().source);
  Graph<float> g;
  const auto memory = run.model().encoder().encode(g, input);
  const auto out = run.model().decoder().greedy_decode(memory, run.model().bos(), run.model().eos(), 5);
  std::vector<std::string> words;
  for (std::size_t id : out) words.push_back(run.vocab().target.token(id));
  CHECK(words == std::vector<std::string>{"a", "b", "</s>"});
}
