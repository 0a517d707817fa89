#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dfdetect/manifest.hpp"
#include "dfdetect/model.hpp"
#include "dfdetect/synth.hpp"
#include "dfdetect/trainer.hpp"

namespace dfdetect::cli {

struct DataSection {
  std::optional<std::filesystem::path> manifest;  // unset: synthesize from `synth`
  SynthConfig synth;
};

struct ModelSection {
  std::string id = "model";
  BackboneSpec backbone;
  bool input_shape_set = false;  // otherwise inferred from the data
  std::size_t head_hidden = 256;
};

struct EvalSection {
  double threshold = 0.5;
  Split split = Split::test;
  std::optional<std::filesystem::path> report;
};

/// One experiment: every section mirrors the config of the module it drives.
/// `seed` is propagated to every stochastic component via derive_seed.
struct RunConfig {
  std::uint64_t seed = 0;
  DataSection data;
  ModelSection model;
  TrainConfig train;
  EvalSection eval;

  /// Pushes `seed` into synth, backbone and trainer seeds.
  void apply_seed(std::uint64_t new_seed);
  std::uint64_t head_seed() const;
};

/// JSON document; every key is optional. Unknown keys and type errors throw
/// Error(usage, "config.invalid") naming the offending key path.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

}  // namespace dfdetect::cli
