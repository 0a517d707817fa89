#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dfdetect/model.hpp"

namespace dfdetect {

/// Model-level resource summary: parameter count, per-sample latency and
/// serialized size.
struct ProfileRecord {
  std::string model_id;
  std::size_t param_count = 0;
  double inference_ms = 0.0;  // mean over timed reps
  double size_mb = 0.0;       // checkpoint bytes / 2^20
  std::vector<double> rep_ms;
};

/// Runs `warmup` untimed forwards on `input`, then `reps` timed ones.
ProfileRecord profile(const ClassifierModel& model, std::span<const double> input,
                      std::size_t warmup, std::size_t reps);

/// "name & params(M, 1 dp) & latency(ms, 1 dp) & size(MB, integer)".
std::string render_profile_row(const ProfileRecord& record);

/// Key/value listing with the exact parameter count.
std::string render_profile_record(const ProfileRecord& record);

}  // namespace dfdetect
