#include "dfdetect/profile.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "dfdetect/checkpoint.hpp"
#include "dfdetect/error.hpp"

namespace dfdetect {

ProfileRecord profile(const ClassifierModel& model, std::span<const double> input, std::size_t warmup,
                      std::size_t reps) {
  if (reps == 0) fail(ErrorKind::usage, "profile.bad_reps", "reps must be >= 1");
  ProfileRecord record;
  record.model_id = model.model_id();
  record.param_count = count_params(model);
  record.size_mb = static_cast<double>(serialize_checkpoint(model).size()) / (1024.0 * 1024.0);

  volatile double sink = 0.0;
  for (std::size_t i = 0; i < warmup; ++i) sink = sink + model.score(input);
  record.rep_ms.reserve(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    sink = sink + model.score(input);
    const auto stop = std::chrono::steady_clock::now();
    record.rep_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  const auto [lo, hi] = std::minmax_element(record.rep_ms.begin(), record.rep_ms.end());
  const double mean =
      std::accumulate(record.rep_ms.begin(), record.rep_ms.end(), 0.0) / static_cast<double>(reps);
  record.inference_ms = std::clamp(mean, *lo, *hi);  // rounding can overshoot on equal reps
  return record;
}

std::string render_profile_row(const ProfileRecord& record) {
  char buf[128];
  std::snprintf(buf, sizeof buf, " & %.1f & %.1f & %.0f",
                static_cast<double>(record.param_count) / 1e6, record.inference_ms, record.size_mb);
  return record.model_id + buf;
}

std::string render_profile_record(const ProfileRecord& record) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "param_count: %zu\ninference_ms: %.4f\nsize_mb: %.6f\n",
                record.param_count, record.inference_ms, record.size_mb);
  return "model_id: " + record.model_id + "\n" + buf;
}

}  // namespace dfdetect
