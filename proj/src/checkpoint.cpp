#include "dfdetect/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "dfdetect/error.hpp"
#include "json.hpp"

namespace dfdetect {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormatTag = "dfdetect-checkpoint";

[[noreturn]] void bad_checkpoint(const std::string& what) {
  fail(ErrorKind::data, "checkpoint.invalid", "invalid checkpoint: " + what);
}

Json spec_to_json(const BackboneSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["input_shape"] = {spec.input_shape.height, spec.input_shape.width, spec.input_shape.channels};
  j["embed_dim"] = spec.embed_dim;
  j["seed"] = spec.seed;
  j["external_id"] = spec.external_id;
  j["trainable"] = spec.trainable;
  j["normalization"] = {{"mean", spec.normalization.mean}, {"std", spec.normalization.std}};
  return j;
}

BackboneSpec spec_from_json(const Json& j) {
  BackboneSpec spec;
  spec.kind = parse_backbone_kind(j.at("kind").get<std::string>());
  const auto shape = j.at("input_shape").get<std::vector<std::size_t>>();
  if (shape.size() != 3) bad_checkpoint("input_shape must have 3 entries");
  spec.input_shape = {shape[0], shape[1], shape[2]};
  spec.embed_dim = j.at("embed_dim").get<std::size_t>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.external_id = j.at("external_id").get<std::string>();
  spec.trainable = j.at("trainable").get<bool>();
  spec.normalization.mean = j.at("normalization").at("mean").get<std::array<double, 3>>();
  spec.normalization.std = j.at("normalization").at("std").get<std::array<double, 3>>();
  return spec;
}

}  // namespace

std::string serialize_checkpoint(const ClassifierModel& model, const CheckpointMeta& meta) {
  Json j;
  j["format"] = kFormatTag;
  j["format_version"] = kCheckpointFormatVersion;
  j["model_id"] = model.model_id();
  j["backbone"] = spec_to_json(model.spec());
  j["head"] = {{"hidden", model.head().hidden()}, {"activation", "relu"}, {"output", "sigmoid"}};
  Json params = Json::array();
  for (const auto* p : model.parameters()) {
    params.push_back({{"name", p->name}, {"shape", p->shape}, {"trainable", p->trainable},
                      {"values", p->values}});
  }
  j["parameters"] = std::move(params);
  Json m = Json::object();
  for (const auto& [k, v] : meta) m[k] = v;
  j["meta"] = std::move(m);
  return j.dump() + "\n";
}

LoadedCheckpoint deserialize_checkpoint(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    bad_checkpoint(e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormatTag) bad_checkpoint("unknown format tag");
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      bad_checkpoint("unsupported format_version " + std::to_string(version));

    const BackboneSpec spec = spec_from_json(j.at("backbone"));
    const std::size_t hidden = j.at("head").at("hidden").get<std::size_t>();
    ClassifierModel model = build_model(spec, hidden, 0, j.at("model_id").get<std::string>());

    auto params = model.parameters();
    const auto& stored = j.at("parameters");
    if (stored.size() != params.size())
      bad_checkpoint("expected " + std::to_string(params.size()) + " parameter arrays, found " +
                     std::to_string(stored.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& s = stored[i];
      auto& p = *params[i];
      if (s.at("name").get<std::string>() != p.name) bad_checkpoint("parameter " + std::to_string(i) + " name mismatch");
      if (s.at("shape").get<std::vector<std::size_t>>() != p.shape) bad_checkpoint(p.name + " shape mismatch");
      auto values = s.at("values").get<std::vector<double>>();
      if (values.size() != p.size()) bad_checkpoint(p.name + " value count mismatch");
      p.values = std::move(values);
      p.trainable = s.at("trainable").get<bool>();
    }

    LoadedCheckpoint out{std::move(model), {}};
    for (const auto& [k, v] : j.at("meta").items()) out.meta[k] = v.get<double>();
    return out;
  } catch (const Json::exception& e) {
    bad_checkpoint(e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ClassifierModel& model,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::runtime, "io.write_failed", "cannot write checkpoint: " + path.string());
  out << serialize_checkpoint(model, meta);
  if (!out) fail(ErrorKind::runtime, "io.write_failed", "error writing checkpoint: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "checkpoint.missing_file", "cannot open checkpoint: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace dfdetect
