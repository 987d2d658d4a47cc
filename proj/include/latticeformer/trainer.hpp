#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "latticeformer/adam.hpp"
#include "latticeformer/config.hpp"
#include "latticeformer/encoder.hpp"
#include "latticeformer/metrics.hpp"
#include "latticeformer/seq2seq.hpp"
#include "latticeformer/toy_tasks.hpp"
#include "latticeformer/vocabulary.hpp"

namespace latticeformer {

struct Vocabularies {
  Vocabulary source;  // edge surfaces, <unk> first
  Vocabulary target;  // <unk>, <s>, </s>, then target tokens
};

Vocabularies build_vocabularies(const std::vector<TrainingExample>& train);

struct PreparedExample {
  EncoderInput input;
  Sequence target;
};

// Maps examples to ids. With `shuffled_relations`, each sentence's relation
// matrix is reindexed by a random edge permutation drawn from `seed`.
std::vector<PreparedExample> prepare_examples(const std::vector<TrainingExample>& examples,
                                              const Vocabularies& vocab, bool shuffled_relations,
                                              std::uint64_t seed);

struct EvalResult {
  double token_accuracy = 0.0;
  double exact_match = 0.0;
};

// Greedy decoding with a cap of |reference| + 2 tokens.
EvalResult evaluate(const Seq2SeqModel<float>& model, std::span<const PreparedExample> examples);

struct MetricRecord {
  std::size_t step = 0;
  double loss = 0.0;
  bool evaluated = false;
  EvalResult eval;
};

// Tab-separated, fixed precision, no timings.
std::string format_trace(std::span<const MetricRecord> trace);

// Data, vocabularies, model and optimizer of one training run. Training is
// single-threaded and fully determined by the config.
class Run {
 public:
  // Generates the task data. When `vocab` is null it is built from the
  // training split.
  explicit Run(ExperimentConfig config, const Vocabularies* vocab = nullptr);

  // Runs `steps` more updates, calling `on_record` after each. Throws
  // std::runtime_error naming the step if the loss becomes non-finite.
  void train(std::size_t steps, const std::function<void(const MetricRecord&)>& on_record = {});

  EvalResult evaluate_split(const std::string& split) const;

  // Writes config.json, params.bin, source_vocab.json, target_vocab.json and
  // metrics.tsv.
  void save(const std::filesystem::path& dir) const;
  // Rebuilds a run from a saved directory (data is regenerated from the
  // task seed).
  static std::unique_ptr<Run> load(const std::filesystem::path& dir);

  const ExperimentConfig& config() const noexcept { return config_; }
  const Vocabularies& vocab() const noexcept { return vocab_; }
  const std::vector<PreparedExample>& train_examples() const noexcept { return train_; }
  const std::vector<PreparedExample>& held_out_examples() const noexcept { return held_out_; }
  Seq2SeqModel<float>& model() noexcept { return *model_; }
  const std::vector<MetricRecord>& trace() const noexcept { return trace_; }
  std::size_t steps_done() const noexcept { return steps_done_; }

 private:
  ExperimentConfig config_;
  Vocabularies vocab_;
  std::vector<PreparedExample> train_;
  std::vector<PreparedExample> held_out_;
  std::unique_ptr<Seq2SeqModel<float>> model_;
  std::unique_ptr<Adam<float>> optimizer_;
  std::mt19937_64 batch_rng_;
  std::mt19937_64 dropout_rng_;
  std::vector<std::size_t> epoch_order_;
  std::size_t epoch_pos_ = 0;
  std::size_t steps_done_ = 0;
  std::vector<MetricRecord> trace_;
};

}  // namespace latticeformer
