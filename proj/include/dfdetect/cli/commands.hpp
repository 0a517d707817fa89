#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dfdetect/cli/config.hpp"
#include "dfdetect/fusion.hpp"
#include "dfdetect/metrics.hpp"
#include "dfdetect/profile.hpp"
#include "dfdetect/trainer.hpp"

namespace dfdetect::cli {

// Library side of the `dfdetect` subcommands. Each function is one job,
// throws dfdetect::Error on failure and writes its artifacts to disk.

/// Writes `<out_dir>/manifest.txt` (inline features) and returns its path.
std::filesystem::path cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir,
                                bool overwrite = false);

struct TrainRun {
  std::filesystem::path run_dir;
  FitResult result;
};

/// Trains one model into a fresh run directory containing:
///   config.json       effective configuration
///   stats.jsonl       one deterministic record per epoch
///   timing.jsonl      per-epoch wall time
///   best.ckpt.json    checkpoint with the highest validation AUC
///   final.ckpt.json   checkpoint after the last epoch
/// An existing non-empty run directory is an error unless `overwrite`.
TrainRun cmd_train(const RunConfig& config, const std::filesystem::path& run_dir, bool overwrite = false,
                   std::ostream* log = nullptr);

/// Scores one split in manifest order and writes a score file.
ScoreSet cmd_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                     Split split, const std::filesystem::path& out);

FusedScores cmd_fuse(std::span<const std::filesystem::path> score_files, const std::filesystem::path& out);

/// The score file must cover the manifest split exactly.
EvalReport cmd_eval(const std::filesystem::path& scores, const std::filesystem::path& manifest, Split split,
                    double threshold, const std::optional<std::filesystem::path>& out);

ProfileRecord cmd_profile(const std::filesystem::path& checkpoint, std::size_t warmup, std::size_t reps,
                          const std::optional<std::filesystem::path>& out);

}  // namespace dfdetect::cli
