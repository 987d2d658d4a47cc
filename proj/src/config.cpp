#include "latticeformer/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "latticeformer/error.hpp"

namespace latticeformer {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads known keys from one JSON object, rejecting any it does not know.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InputError("config section '" + name_ + "' must be an object");
  }

  template <typename V>
  void read(const char* key, V& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<V>();
    } catch (const json::exception&) {
      throw InputError("config field '" + name_ + "." + key + "' has the wrong type");
    }
  }

  template <typename Parse>
  void read_enum(const char* key, Parse parse) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_string()) throw InputError("config field '" + name_ + "." + key + "' must be a string");
    parse(it->template get<std::string>());
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw InputError("unknown config field '" + name_ + "." + key + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& message) {
  if (!ok) throw InputError(message);
}

}  // namespace

DecoderConfig ExperimentConfig::decoder(std::size_t vocab_size) const {
  DecoderConfig d;
  d.d_model = encoder.d_model;
  d.heads = encoder.heads;
  d.layers = decoder_layers;
  d.d_ff = decoder_d_ff;
  d.vocab_size = vocab_size;
  d.dropout = encoder.dropout;
  d.scaling = encoder.scaling;
  d.scale_embeddings = encoder.scale_embeddings;
  d.layer_norm_eps = encoder.layer_norm_eps;
  return d;
}

ExperimentConfig config_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section top(root, "config");
  top.read("seed", c.seed);

  if (const json* j = top.child("encoder")) {
    Section s(*j, "encoder");
    EncoderConfig& e = c.encoder;
    s.read("d_model", e.d_model);
    s.read("heads", e.heads);
    s.read("layers", e.layers);
    s.read("d_ff", e.d_ff);
    s.read("dropout", e.dropout);
    s.read_enum("positional", [&](const std::string& v) { e.positional = parse_positional_mode(v); });
    s.read_enum("attention", [&](const std::string& v) { e.attention = parse_attention_mode(v); });
    s.read_enum("scaling", [&](const std::string& v) {
      if (v == "head_dim") e.scaling = AttentionScaling::head_dim;
      else if (v == "model_dim") e.scaling = AttentionScaling::model_dim;
      else throw InputError("unknown scaling '" + v + "'");
    });
    s.read("scale_embeddings", e.scale_embeddings);
    s.read("pre_norm", e.pre_norm);
    s.read("layer_norm_eps", e.layer_norm_eps);
    s.finish();
  }
  if (const json* j = top.child("decoder")) {
    Section s(*j, "decoder");
    s.read("layers", c.decoder_layers);
    s.read("d_ff", c.decoder_d_ff);
    s.finish();
  }
  if (const json* j = top.child("optimizer")) {
    Section s(*j, "optimizer");
    OptimizerConfig& o = c.optimizer;
    s.read_enum("schedule", [&](const std::string& v) { o.schedule.kind = parse_schedule_kind(v); });
    s.read("learning_rate", o.schedule.learning_rate);
    s.read("warmup_steps", o.schedule.warmup_steps);
    s.read("beta1", o.beta1);
    s.read("beta2", o.beta2);
    s.read("epsilon", o.epsilon);
    s.read("accumulation_steps", o.accumulation_steps);
    s.finish();
  }
  if (const json* j = top.child("task")) {
    Section s(*j, "task");
    ToyTaskConfig& t = c.task;
    s.read_enum("kind", [&](const std::string& v) { t.kind = parse_task_kind(v); });
    s.read("alphabet_size", t.alphabet_size);
    s.read("min_length", t.min_length);
    s.read("max_length", t.max_length);
    s.read("segmenters", t.segmenters);
    s.read("max_token_length", t.max_token_length);
    s.read("train_size", t.train_size);
    s.read("held_out_size", t.held_out_size);
    s.read("seed", t.seed);
    s.finish();
  }
  if (const json* j = top.child("training")) {
    Section s(*j, "training");
    TrainingConfig& t = c.training;
    s.read("steps", t.steps);
    s.read("batch_size", t.batch_size);
    s.read("eval_every", t.eval_every);
    s.read("shuffled_relations", t.shuffled_relations);
    s.finish();
  }
  top.finish();

  c.optimizer.schedule.d_model = c.encoder.d_model;
  check(c.training.batch_size >= 1, "training.batch_size must be at least 1");
  check(c.decoder_layers >= 1 && c.decoder_d_ff >= 1, "decoder extents must be at least 1");
  try {
    c.optimizer.validate();
    c.task.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  const EncoderConfig& e = c.encoder;
  j["encoder"] = {{"d_model", e.d_model},
                  {"heads", e.heads},
                  {"layers", e.layers},
                  {"d_ff", e.d_ff},
                  {"dropout", e.dropout},
                  {"positional", std::string(to_string(e.positional))},
                  {"attention", std::string(to_string(e.attention))},
                  {"scaling", e.scaling == AttentionScaling::head_dim ? "head_dim" : "model_dim"},
                  {"scale_embeddings", e.scale_embeddings},
                  {"pre_norm", e.pre_norm},
                  {"layer_norm_eps", e.layer_norm_eps}};
  j["decoder"] = {{"layers", c.decoder_layers}, {"d_ff", c.decoder_d_ff}};
  const OptimizerConfig& o = c.optimizer;
  j["optimizer"] = {{"schedule", std::string(to_string(o.schedule.kind))},
                    {"learning_rate", o.schedule.learning_rate},
                    {"warmup_steps", o.schedule.warmup_steps},
                    {"beta1", o.beta1},
                    {"beta2", o.beta2},
                    {"epsilon", o.epsilon},
                    {"accumulation_steps", o.accumulation_steps}};
  const ToyTaskConfig& t = c.task;
  j["task"] = {{"kind", std::string(to_string(t.kind))},
               {"alphabet_size", t.alphabet_size},
               {"min_length", t.min_length},
               {"max_length", t.max_length},
               {"segmenters", t.segmenters},
               {"max_token_length", t.max_token_length},
               {"train_size", t.train_size},
               {"held_out_size", t.held_out_size},
               {"seed", t.seed}};
  j["training"] = {{"steps", c.training.steps},
                   {"batch_size", c.training.batch_size},
                   {"eval_every", c.training.eval_every},
                   {"shuffled_relations", c.training.shuffled_relations}};
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace latticeformer
