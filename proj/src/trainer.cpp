#include "latticeformer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "latticeformer/checkpoint.hpp"
#include "latticeformer/error.hpp"
#include "latticeformer/ops.hpp"

namespace latticeformer {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

}  // namespace

Vocabularies build_vocabularies(const std::vector<TrainingExample>& train) {
  std::map<std::string, std::size_t> surfaces;
  std::map<std::string, std::size_t> targets;
  for (const auto& ex : train) {
    for (const Edge& e : ex.lattice.edges) ++surfaces[e.surface];
    for (const auto& t : ex.target) ++targets[t];
  }
  Vocabularies v;
  v.source = Vocabulary::build(surfaces, 1, {std::string(kUnkToken)});
  v.target = Vocabulary::build(targets, 1,
                               {std::string(kUnkToken), std::string(kBosToken), std::string(kEosToken)});
  return v;
}

std::vector<PreparedExample> prepare_examples(const std::vector<TrainingExample>& examples,
                                              const Vocabularies& vocab, bool shuffled_relations,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    PreparedExample p;
    p.input = make_encoder_input(ex.lattice, vocab.source);
    if (shuffled_relations) {
      std::vector<std::size_t> order(p.input.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      p.input.relations = p.input.relations.reindexed(order);
    }
    for (const auto& t : ex.target) p.target.push_back(vocab.target.id(t));
    out.push_back(std::move(p));
  }
  return out;
}

EvalResult evaluate(const Seq2SeqModel<float>& model, std::span<const PreparedExample> examples) {
  std::vector<Sequence> predictions;
  std::vector<Sequence> references;
  predictions.reserve(examples.size());
  for (const auto& ex : examples) {
    predictions.push_back(model.greedy_decode(ex.input, ex.target.size() + 2));
    references.push_back(ex.target);
  }
  return {token_accuracy(predictions, references), exact_match(predictions, references)};
}

std::string format_trace(std::span<const MetricRecord> trace) {
  std::string out = "step\tloss\ttoken_accuracy\texact_match\n";
  char line[128];
  for (const auto& r : trace) {
    if (r.evaluated) {
      std::snprintf(line, sizeof line, "%zu\t%.6f\t%.4f\t%.4f\n", r.step, r.loss,
                    r.eval.token_accuracy, r.eval.exact_match);
    } else {
      std::snprintf(line, sizeof line, "%zu\t%.6f\t\t\n", r.step, r.loss);
    }
    out += line;
  }
  return out;
}

Run::Run(ExperimentConfig config, const Vocabularies* vocab) : config_(std::move(config)) {
  const ToyDataset data = generate_toy_dataset(config_.task);
  vocab_ = vocab != nullptr ? *vocab : build_vocabularies(data.train);
  const bool shuffled = config_.training.shuffled_relations;
  train_ = prepare_examples(data.train, vocab_, shuffled, config_.task.seed + 1);
  held_out_ = prepare_examples(data.held_out, vocab_, shuffled, config_.task.seed + 2);

  EncoderConfig enc = config_.encoder;
  enc.vocab_size = vocab_.source.size();
  const std::size_t bos = *vocab_.target.find(kBosToken);
  const std::size_t eos = *vocab_.target.find(kEosToken);
  model_ = std::make_unique<Seq2SeqModel<float>>(enc, config_.decoder(vocab_.target.size()),
                                                 config_.seed, bos, eos);
  optimizer_ = std::make_unique<Adam<float>>(model_->params(), config_.optimizer);

  std::seed_seq batch_seed{config_.seed, std::uint64_t{1}};
  std::seed_seq dropout_seed{config_.seed, std::uint64_t{2}};
  batch_rng_.seed(batch_seed);
  dropout_rng_.seed(dropout_seed);
}

void Run::train(std::size_t steps, const std::function<void(const MetricRecord&)>& on_record) {
  const std::size_t batch = config_.training.batch_size;
  const std::size_t eval_every = config_.training.eval_every;
  const std::size_t last = steps_done_ + steps;
  while (steps_done_ < last) {
    std::vector<std::size_t> indices;
    while (indices.size() < batch) {
      if (epoch_pos_ == epoch_order_.size()) {
        epoch_order_.resize(train_.size());
        std::iota(epoch_order_.begin(), epoch_order_.end(), 0);
        std::shuffle(epoch_order_.begin(), epoch_order_.end(), batch_rng_);
        epoch_pos_ = 0;
      }
      indices.push_back(epoch_order_[epoch_pos_++]);
    }
    std::size_t tokens = 0;
    for (std::size_t i : indices) tokens += train_[i].target.size() + 1;
    const float weight = 1.0f / static_cast<float>(tokens);

    double total = 0.0;
    for (std::size_t i : indices) {
      Graph<float> graph(dropout_rng_);
      const Var<float> loss = model_->loss(graph, train_[i].input, train_[i].target);
      total += loss.value().item();
      graph.backward(scale(loss, weight));
    }
    ++steps_done_;
    MetricRecord record;
    record.step = steps_done_;
    record.loss = total / static_cast<double>(tokens);
    if (!std::isfinite(record.loss)) {
      throw std::runtime_error("non-finite loss at step " + std::to_string(steps_done_));
    }
    optimizer_->step();
    if ((eval_every != 0 && steps_done_ % eval_every == 0) || steps_done_ == last) {
      record.evaluated = true;
      record.eval = evaluate(*model_, held_out_);
    }
    trace_.push_back(record);
    if (on_record) on_record(record);
  }
}

EvalResult Run::evaluate_split(const std::string& split) const {
  if (split == "held-out" || split == "held_out") return evaluate(*model_, held_out_);
  if (split == "train") return evaluate(*model_, train_);
  throw InputError("unknown split '" + split + "' (expected held-out or train)");
}

void Run::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  ExperimentConfig saved = config_;
  saved.training.steps = steps_done_;
  write_file(dir / "config.json", config_to_json(saved));
  write_file(dir / "source_vocab.json", vocab_.source.to_json());
  write_file(dir / "target_vocab.json", vocab_.target.to_json());
  write_file(dir / "metrics.tsv", format_trace(trace_));
  save_checkpoint(model_->params(), dir / "params.bin");
}

std::unique_ptr<Run> Run::load(const std::filesystem::path& dir) {
  const ExperimentConfig config = load_config(dir / "config.json");
  Vocabularies vocab;
  vocab.source = Vocabulary::from_json(read_file(dir / "source_vocab.json"));
  vocab.target = Vocabulary::from_json(read_file(dir / "target_vocab.json"));
  auto run = std::make_unique<Run>(config, &vocab);
  load_checkpoint(run->model().params(), dir / "params.bin");
  run->steps_done_ = config.training.steps;
  return run;
}

}  // namespace latticeformer
