#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dfdetect/dataset.hpp"
#include "dfdetect/model.hpp"

namespace dfdetect {

/// Scores are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbabilityClamp = 1e-7;

struct TrainConfig {
  double learning_rate = 1e-6;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  /// Unset: n_fake / n_real of the training split.
  std::optional<double> real_class_weight;
  std::uint64_t seed = 0;
  /// Stop after this many epochs without a validation AUC improvement; 0 disables.
  std::size_t early_stop_patience = 5;

  /// Throws Error(usage, "train.bad_config") naming the offending field.
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
  double val_eer = 0.0;
  double wall_ms = 0.0;  // not part of the deterministic record
};

/// L = -(1/N) sum_i [ y_i log p_i + w_real (1 - y_i) log(1 - p_i) ], y = 1 for fake.
double weighted_bce(std::span<const double> scores, std::span<const int> labels, double w_real);

struct LossGradient {
  double loss = 0.0;
  Gradients grads;  // aligned with model.parameters(); zero for frozen arrays
};

/// Exact gradient of weighted_bce(forward(model, batch)) with respect to every
/// parameter. Samples whose score is clamped contribute zero gradient, which
/// matches the clamped loss.
LossGradient loss_gradient(const ClassifierModel& model, std::span<const std::vector<double>> batch,
                           std::span<const int> labels, double w_real);

struct AdamState {
  Gradients first_moment;
  Gradients second_moment;
  std::uint64_t step = 0;
};

/// Bias-corrected Adam update of every trainable parameter. An empty state is
/// sized to the parameters (zeros) on first use.
void adam_step(std::span<Parameter* const> params, const Gradients& grads, AdamState& state,
               const TrainConfig& config);
void adam_step(ClassifierModel& model, const Gradients& grads, AdamState& state, const TrainConfig& config);

struct FitResult {
  ClassifierModel best;        // parameters of the epoch with the highest validation AUC
  ClassifierModel last;        // parameters after the final epoch
  std::vector<EpochStats> stats;
  std::optional<std::size_t> best_epoch;
  double best_val_auc = 0.0;
  double real_class_weight = 1.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

FitResult fit(const ClassifierModel& initial, const LabeledSet& train, const LabeledSet& val,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Uses the train split of `train` and the val split of `val`.
FitResult fit(const ClassifierModel& initial, const DatasetManifest& train, const DatasetManifest& val,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace dfdetect
