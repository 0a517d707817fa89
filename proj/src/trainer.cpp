#include "dfdetect/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dfdetect/error.hpp"
#include "dfdetect/metrics.hpp"
#include "dfdetect/random.hpp"

namespace dfdetect {

void TrainConfig::validate() const {
  const auto bad = [](const std::string& what) { fail(ErrorKind::usage, "train.bad_config", what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("train.learning_rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) bad("train.adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) bad("train.adam_beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) bad("train.adam_eps must be > 0");
  if (batch_size == 0) bad("train.batch_size must be >= 1");
  if (real_class_weight && !(*real_class_weight > 0.0 && std::isfinite(*real_class_weight)))
    bad("train.real_class_weight must be > 0");
}

namespace {

void check_loss_inputs(std::size_t n_scores, std::span<const int> labels, double w_real) {
  if (n_scores != labels.size())
    fail(ErrorKind::data, "loss.length_mismatch", "scores and labels differ in length");
  if (labels.empty()) fail(ErrorKind::data, "loss.empty", "loss needs at least one sample");
  if (!(w_real > 0.0) || !std::isfinite(w_real))
    fail(ErrorKind::usage, "loss.bad_weight", "w_real must be a positive finite number");
  for (int y : labels)
    if (y != 0 && y != 1) fail(ErrorKind::data, "loss.bad_label", "labels must be 0 (real) or 1 (fake)");
}

double sample_loss(double p, int label, double w_real) {
  const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return label == 1 ? -std::log(pc) : -w_real * std::log(1.0 - pc);
}

// d(sample_loss)/d(logit); zero where the clamp is active.
double sample_dlogit(double p, int label, double w_real) {
  if (p < kProbabilityClamp || p > 1.0 - kProbabilityClamp) return 0.0;
  return label == 1 ? p - 1.0 : w_real * p;
}

template <typename InputAt>
LossGradient accumulate(const ClassifierModel& model, std::size_t n, InputAt&& input_at,
                        std::span<const int> labels, double w_real) {
  LossGradient out{0.0, model.zero_gradients()};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> x = input_at(i);
    const double p = model.score(x);
    out.loss += sample_loss(p, labels[i], w_real);
    const double d = sample_dlogit(p, labels[i], w_real) * inv_n;
    if (d != 0.0) model.backprop(x, d, out.grads);
  }
  out.loss /= static_cast<double>(n);
  return out;
}

}  // namespace

double weighted_bce(std::span<const double> scores, std::span<const int> labels, double w_real) {
  check_loss_inputs(scores.size(), labels, w_real);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) total += sample_loss(scores[i], labels[i], w_real);
  return total / static_cast<double>(scores.size());
}

LossGradient loss_gradient(const ClassifierModel& model, std::span<const std::vector<double>> batch,
                           std::span<const int> labels, double w_real) {
  check_loss_inputs(batch.size(), labels, w_real);
  return accumulate(
      model, batch.size(), [&](std::size_t i) { return std::span<const double>(batch[i]); }, labels, w_real);
}

void adam_step(std::span<Parameter* const> params, const Gradients& grads, AdamState& state,
               const TrainConfig& config) {
  if (grads.size() != params.size())
    fail(ErrorKind::usage, "adam.shape_mismatch", "gradient count does not match parameter count");
  if (state.first_moment.empty() && state.second_moment.empty() && state.step == 0) {
    for (const auto* p : params) {
      state.first_moment.emplace_back(p->size(), 0.0);
      state.second_moment.emplace_back(p->size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size())
    fail(ErrorKind::usage, "adam.shape_mismatch", "optimizer state does not match parameters");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto n = params[k]->size();
    if (grads[k].size() != n || state.first_moment[k].size() != n || state.second_moment[k].size() != n)
      fail(ErrorKind::usage, "adam.shape_mismatch", "shape mismatch for parameter " + params[k]->name);
  }

  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k]->trainable) continue;
    auto& theta = params[k]->values;
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    const auto& g = grads[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
  }
}

void adam_step(ClassifierModel& model, const Gradients& grads, AdamState& state, const TrainConfig& config) {
  auto params = model.parameters();
  adam_step(std::span<Parameter* const>(params), grads, state, config);
}

FitResult fit(const ClassifierModel& initial, const LabeledSet& train, const LabeledSet& val,
              const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train.size() == 0) fail(ErrorKind::data, "data.train_split_empty", "train split empty");
  if (train.count(Label::real) == 0 || train.count(Label::fake) == 0)
    fail(ErrorKind::data, "data.single_class_train", "training split must contain both classes");
  if (val.size() == 0) fail(ErrorKind::data, "data.val_split_empty", "validation split empty");
  if (val.count(Label::real) == 0 || val.count(Label::fake) == 0)
    fail(ErrorKind::data, "data.single_class_val", "validation split must contain both classes");

  const double w_real =
      config.real_class_weight.value_or(class_weight(train.count(Label::real), train.count(Label::fake)));

  FitResult result{initial, initial, {}, std::nullopt, 0.0, w_real};
  ClassifierModel& model = result.last;
  AdamState state;
  Rng rng(derive_seed(config.seed, 10));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> batch_labels;
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch_labels.clear();
      for (std::size_t i = begin; i < end; ++i) batch_labels.push_back(train.labels[order[i]]);
      auto lg = accumulate(
          model, end - begin,
          [&](std::size_t i) { return std::span<const double>(train.inputs[order[begin + i]]); },
          batch_labels, w_real);
      loss_sum += lg.loss * static_cast<double>(end - begin);
      adam_step(model, lg.grads, state, config);
    }

    const auto scores = forward(model, val.inputs);
    const auto curve = roc_curve(scores, val.labels);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.val_auc = auc(curve);
    stats.val_eer = eer(curve);
    stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.stats.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (!result.best_epoch || stats.val_auc > result.best_val_auc) {
      result.best = model;
      result.best_epoch = epoch;
      result.best_val_auc = stats.val_auc;
      since_best = 0;
    } else if (config.early_stop_patience > 0 && ++since_best >= config.early_stop_patience) {
      break;
    }
  }
  return result;
}

FitResult fit(const ClassifierModel& initial, const DatasetManifest& train, const DatasetManifest& val,
              const TrainConfig& config, const EpochCallback& on_epoch) {
  const auto& shape = initial.spec().input_shape;
  const auto& norm = initial.spec().normalization;
  return fit(initial, materialize(train, Split::train, shape, norm), materialize(val, Split::val, shape, norm),
             config, on_epoch);
}

}  // namespace dfdetect
