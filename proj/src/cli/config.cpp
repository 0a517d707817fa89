#include "dfdetect/cli/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "dfdetect/error.hpp"
#include "dfdetect/random.hpp"
#include "json.hpp"

namespace dfdetect::cli {

using Json = nlohmann::ordered_json;

void RunConfig::apply_seed(std::uint64_t new_seed) {
  seed = new_seed;
  data.synth.seed = new_seed;
  model.backbone.seed = derive_seed(new_seed, 1);
  train.seed = derive_seed(new_seed, 3);
}

std::uint64_t RunConfig::head_seed() const { return derive_seed(seed, 2); }

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorKind::usage, "config.invalid", "config." + path + ": " + what);
}

// Walks one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_, "expected an object");
  }
  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) invalid(child(key), "unknown key");
  }

  const Json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number()) invalid(child(key), "expected a number");
      out = v->get<double>();
    }
  }
  template <typename Int>
  void count(const std::string& key, Int& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number_unsigned()) invalid(child(key), "expected a non-negative integer");
      out = v->get<Int>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* v = get(key)) {
      if (!v->is_string()) invalid(child(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* v = get(key)) {
      if (!v->is_boolean()) invalid(child(key), "expected true or false");
      out = v->get<bool>();
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::array<double, 3> triple(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) invalid(path, "expected an array of 3 numbers");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) invalid(path, "expected an array of 3 numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

void parse_data(const Json& j, RunConfig& cfg) {
  Section s(j, "data");
  std::string manifest;
  s.string("manifest", manifest);
  if (!manifest.empty()) cfg.data.manifest = manifest;
  if (const auto* synth = s.get("synth")) {
    Section ss(*synth, "data.synth");
    auto& sc = cfg.data.synth;
    ss.count("n_real", sc.n_real);
    ss.count("n_fake", sc.n_fake);
    ss.count("dim", sc.dim);
    ss.number("separation", sc.separation);
    ss.number("label_noise", sc.label_noise);
    ss.number("train_fraction", sc.train_fraction);
    ss.number("val_fraction", sc.val_fraction);
    if (sc.dim == 0) invalid("data.synth.dim", "must be >= 1");
    if (!(sc.separation >= 0.0)) invalid("data.synth.separation", "must be >= 0");
    if (!(sc.label_noise >= 0.0 && sc.label_noise <= 1.0)) invalid("data.synth.label_noise", "must lie in [0, 1]");
    if (!(sc.train_fraction >= 0.0 && sc.val_fraction >= 0.0 && sc.train_fraction + sc.val_fraction <= 1.0))
      invalid("data.synth", "train_fraction and val_fraction must be >= 0 and sum to <= 1");
    ss.finish();
  }
  s.finish();
}

void parse_model(const Json& j, RunConfig& cfg) {
  Section s(j, "model");
  s.string("id", cfg.model.id);
  s.count("head_hidden", cfg.model.head_hidden);
  if (cfg.model.head_hidden == 0) invalid("model.head_hidden", "must be >= 1");
  std::string fine_tune;
  s.string("fine_tune", fine_tune);
  if (!fine_tune.empty()) {
    if (fine_tune == "full") cfg.model.backbone.trainable = true;
    else if (fine_tune == "head_only") cfg.model.backbone.trainable = false;
    else invalid("model.fine_tune", "expected 'full' or 'head_only'");
  }
  if (const auto* b = s.get("backbone")) {
    Section bs(*b, "model.backbone");
    auto& spec = cfg.model.backbone;
    std::string kind;
    bs.string("kind", kind);
    if (!kind.empty()) {
      try {
        spec.kind = parse_backbone_kind(kind);
      } catch (const Error&) {
        invalid("model.backbone.kind", "expected toy_mlp, toy_conv or external");
      }
    }
    if (const auto* shape = bs.get("input_shape")) {
      if (!shape->is_array() || shape->size() != 3 ||
          !std::all_of(shape->begin(), shape->end(), [](const Json& v) { return v.is_number_unsigned(); }))
        invalid("model.backbone.input_shape", "expected [height, width, channels]");
      spec.input_shape = {(*shape)[0].get<std::size_t>(), (*shape)[1].get<std::size_t>(),
                          (*shape)[2].get<std::size_t>()};
      if (spec.input_shape.size() == 0) invalid("model.backbone.input_shape", "dimensions must be >= 1");
      cfg.model.input_shape_set = true;
    }
    bs.count("embed_dim", spec.embed_dim);
    if (spec.embed_dim == 0) invalid("model.backbone.embed_dim", "must be >= 1");
    bs.string("external_id", spec.external_id);
    if (const auto* n = bs.get("normalization")) {
      Section ns(*n, "model.backbone.normalization");
      if (const auto* m = ns.get("mean")) spec.normalization.mean = triple(*m, "model.backbone.normalization.mean");
      if (const auto* sd = ns.get("std")) spec.normalization.std = triple(*sd, "model.backbone.normalization.std");
      ns.finish();
    }
    bs.finish();
  }
  s.finish();
}

void parse_train(const Json& j, RunConfig& cfg) {
  Section s(j, "train");
  auto& t = cfg.train;
  s.number("learning_rate", t.learning_rate);
  s.number("adam_beta1", t.adam_beta1);
  s.number("adam_beta2", t.adam_beta2);
  s.number("adam_eps", t.adam_eps);
  s.count("batch_size", t.batch_size);
  s.count("max_epochs", t.max_epochs);
  s.count("early_stop_patience", t.early_stop_patience);
  double w = 0.0;
  s.number("real_class_weight", w);
  if (s.get("real_class_weight")) t.real_class_weight = w;
  s.finish();
  try {
    t.validate();
  } catch (const Error& e) {
    fail(ErrorKind::usage, "config.invalid", std::string("config.") + e.what());
  }
}

void parse_eval(const Json& j, RunConfig& cfg) {
  Section s(j, "eval");
  s.number("threshold", cfg.eval.threshold);
  if (!(cfg.eval.threshold >= 0.0 && cfg.eval.threshold <= 1.0)) invalid("eval.threshold", "must lie in [0, 1]");
  std::string split, report;
  s.string("split", split);
  if (!split.empty()) {
    try {
      cfg.eval.split = parse_split(split);
    } catch (const Error&) {
      invalid("eval.split", "expected train, val or test");
    }
  }
  s.string("report", report);
  if (!report.empty()) cfg.eval.report = report;
  s.finish();
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    fail(ErrorKind::usage, "config.invalid", std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  {
    Section root(j, "");
    std::uint64_t seed = 0;
    root.count("seed", seed);
    cfg.apply_seed(seed);
    if (const auto* d = root.get("data")) parse_data(*d, cfg);
    if (const auto* m = root.get("model")) parse_model(*m, cfg);
    if (const auto* t = root.get("train")) parse_train(*t, cfg);
    if (const auto* e = root.get("eval")) parse_eval(*e, cfg);
    root.finish();
  }
  cfg.data.synth.seed = cfg.seed;  // sections must not desynchronize the seed
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::usage, "config.missing_file", "cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  Json data;
  if (cfg.data.manifest) data["manifest"] = cfg.data.manifest->generic_string();
  const auto& sc = cfg.data.synth;
  data["synth"] = {{"n_real", sc.n_real},       {"n_fake", sc.n_fake},
                   {"dim", sc.dim},             {"separation", sc.separation},
                   {"label_noise", sc.label_noise}, {"train_fraction", sc.train_fraction},
                   {"val_fraction", sc.val_fraction}};
  j["data"] = std::move(data);
  const auto& b = cfg.model.backbone;
  Json backbone = {{"kind", std::string(to_string(b.kind))}, {"embed_dim", b.embed_dim}};
  if (cfg.model.input_shape_set)
    backbone["input_shape"] = {b.input_shape.height, b.input_shape.width, b.input_shape.channels};
  if (!b.external_id.empty()) backbone["external_id"] = b.external_id;
  backbone["normalization"] = {{"mean", b.normalization.mean}, {"std", b.normalization.std}};
  j["model"] = {{"id", cfg.model.id},
                {"head_hidden", cfg.model.head_hidden},
                {"fine_tune", b.trainable ? "full" : "head_only"},
                {"backbone", std::move(backbone)}};
  const auto& t = cfg.train;
  j["train"] = {{"learning_rate", t.learning_rate}, {"adam_beta1", t.adam_beta1},
                {"adam_beta2", t.adam_beta2},       {"adam_eps", t.adam_eps},
                {"batch_size", t.batch_size},       {"max_epochs", t.max_epochs},
                {"early_stop_patience", t.early_stop_patience}};
  if (t.real_class_weight) j["train"]["real_class_weight"] = *t.real_class_weight;
  j["eval"] = {{"threshold", cfg.eval.threshold}, {"split", std::string(to_string(cfg.eval.split))}};
  if (cfg.eval.report) j["eval"]["report"] = cfg.eval.report->generic_string();
  return j.dump(2) + "\n";
}

}  // namespace dfdetect::cli
