#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "dfdetect/model.hpp"

namespace dfdetect {

inline constexpr int kCheckpointFormatVersion = 1;

/// Free-form numeric annotations stored alongside the weights
/// (e.g. the validation AUC a checkpoint was selected at).
using CheckpointMeta = std::map<std::string, double>;

struct LoadedCheckpoint {
  ClassifierModel model;
  CheckpointMeta meta;
};

// Checkpoints are JSON documents: format tag and version, model id, backbone
// spec, head config, and every parameter array (name, shape, trainable flag,
// values) in parameter order. Values round-trip exactly.

std::string serialize_checkpoint(const ClassifierModel& model, const CheckpointMeta& meta = {});
LoadedCheckpoint deserialize_checkpoint(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const ClassifierModel& model,
                     const CheckpointMeta& meta = {});
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dfdetect
