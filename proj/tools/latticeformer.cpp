#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latticeformer/bpe.hpp"
#include "latticeformer/config.hpp"
#include "latticeformer/error.hpp"
#include "latticeformer/harness.hpp"
#include "latticeformer/lattice.hpp"
#include "latticeformer/lattice_io.hpp"
#include "latticeformer/positional.hpp"
#include "latticeformer/segmentation.hpp"
#include "latticeformer/trainer.hpp"

using namespace latticeformer;

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

int bpe_learn(const std::string& corpus, std::size_t merges, const std::string& out) {
  const MergeTable table = learn_bpe(count_words(read_lines(corpus)), merges);
  write_merge_table(table, out);
  std::cout << "learned " << table.merge_count() << " merges\n";
  return 0;
}

int bpe_apply(const std::string& table_path, const std::string& in, const std::string& out_path) {
  const BpeSegmenter segmenter(read_merge_table(table_path));
  auto out = open_output(out_path);
  for (const std::string& line : read_lines(in)) {
    const TokenSeq seq = segmenter.segment(make_element_seq(line), "bpe");
    for (std::size_t k = 0; k < seq.tokens.size(); ++k) {
      if (k > 0) out << ' ';
      out << seq.tokens[k].surface;
    }
    out << '\n';
  }
  return 0;
}

int lattice_build(const std::vector<std::string>& inputs, const std::string& out_path,
                  bool with_positions) {
  std::vector<std::vector<std::string>> files;
  for (const auto& path : inputs) files.push_back(read_lines(path));
  for (std::size_t f = 1; f < files.size(); ++f) {
    if (files[f].size() != files[0].size()) {
      throw InputError(inputs[f] + " has " + std::to_string(files[f].size()) + " lines, " +
                       inputs[0] + " has " + std::to_string(files[0].size()));
    }
  }
  std::vector<Lattice> lattices;
  std::size_t warnings = 0;
  for (std::size_t line = 0; line < files[0].size(); ++line) {
    std::vector<std::string> lines;
    for (const auto& f : files) lines.push_back(f[line]);
    AlignedSegmentations aligned;
    try {
      aligned = align_segmentations(lines, inputs);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line) + ": " + e.what());
    }
    warnings += aligned.warnings.size();
    lattices.push_back(build_lattice(aligned.elements, aligned.segmentations));
  }
  write_lattices(lattices, out_path, with_positions);
  std::cout << "wrote " << lattices.size() << " lattices";
  if (warnings > 0) std::cout << " (" << warnings << " word-boundary warnings)";
  std::cout << '\n';
  return 0;
}

int lattice_relations(const std::string& path, std::size_t line, const std::string& out_path) {
  const auto lattices = read_lattices(path);
  if (line >= lattices.size()) {
    throw InputError("line " + std::to_string(line) + " out of range (" +
                     std::to_string(lattices.size()) + " lattices)");
  }
  auto out = open_output(out_path);
  out << relation_matrix_csv(relation_matrix(lattices[line]));
  return 0;
}

int lattice_validate(const std::string& path) {
  const auto lattices = read_lattices(path);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < lattices.size(); ++k) {
    const auto violations = validate(lattices[k]);
    if (!violations.empty()) ++bad;
    for (const auto& v : violations) std::cerr << "line " << k << ": " << v.message() << '\n';
  }
  std::cout << lattices.size() - bad << " of " << lattices.size() << " lattices valid\n";
  return bad == 0 ? 0 : 1;
}

int grad_check_cmd(const std::string& config_path, std::uint64_t seed, double tolerance) {
  const ExperimentConfig config = load_config(config_path);
  const GradCheckReport report = encoder_grad_check(config.encoder, seed);
  std::printf("%-36s %8s %14s\n", "parameter", "checked", "max_rel_error");
  for (const auto& p : report.params) {
    std::printf("%-36s %8zu %14.3e\n", p.name.c_str(), p.checked, p.max_rel_error);
  }
  const bool ok = report.max_rel_error < tolerance;
  std::printf("overall max relative error %.3e (%s, tolerance %.0e)\n", report.max_rel_error,
              ok ? "ok" : "FAILED", tolerance);
  return ok ? 0 : 1;
}

int param_count_cmd(const std::string& config_path, std::size_t vocab_size) {
  EncoderConfig enc = load_config(config_path).encoder;
  enc.vocab_size = vocab_size;
  enc.validate();
  const ParamCount c = param_count(enc);
  std::printf("d_model=%zu heads=%zu layers=%zu d_ff=%zu vocab=%zu attention=%s positional=%s\n",
              enc.d_model, enc.heads, enc.layers, enc.d_ff, enc.vocab_size,
              std::string(to_string(enc.attention)).c_str(),
              std::string(to_string(enc.positional)).c_str());
  std::printf("embedding        %zu\n", c.embedding);
  std::printf("attention        %zu\n", c.attention);
  std::printf("feed_forward     %zu\n", c.feed_forward);
  std::printf("layer_norm       %zu\n", c.layer_norm);
  std::printf("relation_tables  %zu\n", c.relation_tables);
  std::printf("total            %zu\n", c.total);
  std::printf("lpe_delta        %zu\n", c.lpe_delta);
  std::printf("lsa_delta        %zu\n", c.lsa_delta);
  return 0;
}

void print_record(const MetricRecord& r) {
  if (!r.evaluated) return;
  std::printf("step %zu  loss %.4f  token_accuracy %.4f  exact_match %.4f\n", r.step, r.loss,
              r.eval.token_accuracy, r.eval.exact_match);
  std::fflush(stdout);
}

int train_cmd(const std::string& config_path, const std::string& task, std::size_t steps,
              std::uint64_t seed, const std::string& out) {
  ExperimentConfig config = load_config(config_path);
  if (!task.empty()) config.task.kind = parse_task_kind(task);
  config.seed = seed;
  Run run(config);
  run.train(steps, print_record);
  run.save(out);
  std::cout << "saved " << out << '\n';
  return 0;
}

int eval_cmd(const std::string& ckpt, const std::string& split) {
  const auto run = Run::load(ckpt);
  const EvalResult r = run->evaluate_split(split);
  std::printf("token_accuracy %.4f\nexact_match %.4f\n", r.token_accuracy, r.exact_match);
  return 0;
}

int ablate_cmd(const std::string& config_path, const std::string& modes, std::size_t steps,
               std::uint64_t seed) {
  ExperimentConfig base = load_config(config_path);
  base.seed = seed;
  if (steps == 0) steps = base.training.steps;
  std::vector<AblationRow> rows;
  for (const AblationMode& mode : parse_ablation_modes(modes)) {
    Run run(apply_ablation(base, mode));
    std::cerr << "training " << mode.name << " for " << steps << " steps\n";
    const auto start = std::chrono::steady_clock::now();
    run.train(steps);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    AblationRow row;
    row.mode = mode;
    row.params = run.model().params().scalar_count();
    row.final_loss = run.trace().back().loss;
    row.eval = run.trace().back().eval;
    row.steps_per_second = static_cast<double>(steps) / elapsed.count();
    rows.push_back(row);
  }
  std::cout << format_ablation_table(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice-based Transformer encoder toolkit"};
  app.require_subcommand(1);

  std::string corpus, table, in, out, lattice, config, task, ckpt, split = "held-out",
      modes = "pe,lpe,lsa,lpe+lsa,shuffled";
  std::vector<std::string> inputs;
  std::size_t merges = 0, line = 0, steps = 0, vocab_size = 1000;
  std::uint64_t seed = 7;
  double tolerance = 1e-4;
  bool positions = false;

  auto* learn = app.add_subcommand("bpe-learn", "Learn BPE merges from a corpus");
  learn->add_option("--corpus", corpus, "Training text, one sentence per line")->required();
  learn->add_option("--merges", merges, "Number of merge operations")->required();
  learn->add_option("--out", out, "Merge table output")->required();

  auto* apply = app.add_subcommand("bpe-apply", "Segment text with a merge table");
  apply->add_option("--table", table)->required();
  apply->add_option("--in", in)->required();
  apply->add_option("--out", out)->required();

  auto* build = app.add_subcommand("lattice-build", "Union aligned segmentation files into lattices");
  build->add_option("--inputs", inputs, "Segmentation files, one per segmenter")
      ->required()
      ->delimiter(',');
  build->add_option("--out", out, "JSONL output, one lattice per line")->required();
  build->add_flag("--positions", positions, "Also write each edge's LPE position");

  auto* relations = app.add_subcommand("lattice-relations", "Write one lattice's relation matrix");
  relations->add_option("--lattice", lattice)->required();
  relations->add_option("--line", line, "0-based line of the JSONL file")->required();
  relations->add_option("--out", out)->required();

  auto* check = app.add_subcommand("lattice-validate", "Check lattice invariants");
  check->add_option("--lattice", lattice)->required();

  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of the encoder");
  grad->add_option("--config", config)->required();
  grad->add_option("--seed", seed);
  grad->add_option("--tolerance", tolerance);

  auto* count = app.add_subcommand("param-count", "Parameter totals and mechanism deltas");
  count->add_option("--config", config)->required();
  count->add_option("--vocab-size", vocab_size);

  auto* train = app.add_subcommand("train", "Train on a synthetic task");
  train->add_option("--task", task)->check(CLI::IsMember({"copy", "disambiguate"}));
  train->add_option("--config", config)->required();
  train->add_option("--steps", steps)->required();
  train->add_option("--seed", seed);
  train->add_option("--out", out, "Checkpoint directory")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--ckpt", ckpt)->required();
  eval->add_option("--split", split)->check(CLI::IsMember({"held-out", "train"}));

  auto* ablate = app.add_subcommand("ablate", "Train each encoder variant and compare");
  ablate->add_option("--config", config)->required();
  ablate->add_option("--modes", modes);
  ablate->add_option("--steps", steps, "Defaults to training.steps of the config");
  ablate->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*learn) return bpe_learn(corpus, merges, out);
    if (*apply) return bpe_apply(table, in, out);
    if (*build) return lattice_build(inputs, out, positions);
    if (*relations) return lattice_relations(lattice, line, out);
    if (*check) return lattice_validate(lattice);
    if (*grad) return grad_check_cmd(config, seed, tolerance);
    if (*count) return param_count_cmd(config, vocab_size);
    if (*train) return train_cmd(config, task, steps, seed, out);
    if (*eval) return eval_cmd(ckpt, split);
    if (*ablate) return ablate_cmd(config, modes, steps, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
