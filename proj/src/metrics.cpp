#include "dfdetect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "dfdetect/error.hpp"
#include "dfdetect/fusion.hpp"

namespace dfdetect {

namespace {

void check_labels(std::span<const int> labels) {
  for (int y : labels)
    if (y != 0 && y != 1) fail(ErrorKind::data, "metrics.bad_label", "labels must be 0 (real) or 1 (fake)");
}

// Signed numerator of fpr - fnr over the common denominator n_real * n_fake.
__int128 crossing_sign(const RocPoint& p, std::size_t n_real, std::size_t n_fake) {
  return static_cast<__int128>(p.fp) * static_cast<__int128>(n_fake) -
         static_cast<__int128>(n_fake - p.tp) * static_cast<__int128>(n_real);
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    fail(ErrorKind::data, "metrics.length_mismatch", "scores and labels differ in length");
  check_labels(labels);
  for (double s : scores)
    if (!std::isfinite(s)) fail(ErrorKind::data, "metrics.non_finite", "scores must be finite");

  RocCurve curve;
  curve.n_fake = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  curve.n_real = labels.size() - curve.n_fake;
  if (curve.n_fake == 0 || curve.n_real == 0)
    fail(ErrorKind::data, "metrics.single_class", "ROC undefined: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  curve.points.push_back(RocPoint{});
  std::size_t fp = 0, tp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == t; ++i) (labels[order[i]] == 1 ? tp : fp)++;
    curve.points.push_back(RocPoint{static_cast<double>(fp) / static_cast<double>(curve.n_real),
                                    static_cast<double>(tp) / static_cast<double>(curve.n_fake), t, fp, tp});
  }
  return curve;
}

AucFraction auc_fraction(const RocCurve& curve) {
  AucFraction f;
  f.denominator = 2 * static_cast<std::uint64_t>(curve.n_real) * curve.n_fake;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    f.twice_area += static_cast<std::uint64_t>(b.fp - a.fp) * (a.tp + b.tp);
  }
  return f;
}

double auc(const RocCurve& curve) { return auc_fraction(curve).value(); }

double eer(const RocCurve& curve) {
  const auto& pts = curve.points;
  const double n_real = static_cast<double>(curve.n_real);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const __int128 d = crossing_sign(pts[i], curve.n_real, curve.n_fake);
    if (d == 0) return pts[i].fpr;
    if (d > 0) {
      // pts[i-1] has fpr < fnr; interpolate the crossing on the segment.
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      const double da = static_cast<double>(crossing_sign(a, curve.n_real, curve.n_fake));
      const double db = static_cast<double>(d);
      const double t = -da / (db - da);
      const double fp = static_cast<double>(a.fp) + t * static_cast<double>(b.fp - a.fp);
      return std::clamp(fp / n_real, 0.0, 1.0);
    }
  }
  return 1.0;  // unreachable for a valid curve: the last point is (1,1)
}

Confusion confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    fail(ErrorKind::data, "metrics.length_mismatch", "predicted and true labels differ in length");
  check_labels(predicted);
  check_labels(truth);
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) (predicted[i] == 1 ? c.tp : c.fn)++;
    else (predicted[i] == 1 ? c.fp : c.tn)++;
  }
  return c;
}

namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

F1Scores f1_per_class(std::span<const int> predicted, std::span<const int> truth) {
  if (truth.empty()) fail(ErrorKind::data, "metrics.empty", "f1 needs at least one sample");
  const auto c = confusion(predicted, truth);
  // Real as positive swaps the roles: TP<->TN, FP<->FN.
  return F1Scores{f1(c.tn, c.fn, c.fp), f1(c.tp, c.fp, c.fn)};
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold) {
  const RocCurve curve = roc_curve(scores, labels);
  const auto predicted = classify(scores, threshold);
  const auto f1s = f1_per_class(predicted, labels);

  EvalReport r;
  r.threshold = threshold;
  r.confusion = confusion(predicted, labels);
  r.n_real = curve.n_real;
  r.n_fake = curve.n_fake;
  r.f1_real = 100.0 * f1s.real;
  r.f1_fake = 100.0 * f1s.fake;
  r.accuracy = 100.0 * static_cast<double>(r.confusion.tp + r.confusion.tn) / static_cast<double>(labels.size());
  r.eer = 100.0 * eer(curve);
  r.auc = 100.0 * auc(curve);
  if (r.confusion.tn + r.confusion.fn == 0) r.warnings.push_back("no_predicted_real");
  if (r.confusion.tp + r.confusion.fp == 0) r.warnings.push_back("no_predicted_fake");
  return r;
}

namespace {

std::string one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

}  // namespace

std::string render_table_row(const std::string& name, const EvalReport& r) {
  return name + " & " + one_decimal(r.f1_real) + " & " + one_decimal(r.f1_fake) + " & " +
         one_decimal(r.accuracy) + " & " + one_decimal(r.eer) + " & " + one_decimal(r.auc);
}

std::string render_report(const EvalReport& r) {
  std::ostringstream out;
  char threshold[64];
  std::snprintf(threshold, sizeof threshold, "%.17g", r.threshold);
  out << "model_id: " << r.model_id << "\n";
  if (!r.member_ids.empty()) out << "member_ids: " << join(r.member_ids) << "\n";
  out << "f1_real: " << one_decimal(r.f1_real) << "\n"
      << "f1_fake: " << one_decimal(r.f1_fake) << "\n"
      << "accuracy: " << one_decimal(r.accuracy) << "\n"
      << "eer: " << one_decimal(r.eer) << "\n"
      << "auc: " << one_decimal(r.auc) << "\n"
      << "threshold: " << threshold << "\n"
      << "tp: " << r.confusion.tp << "\n"
      << "fp: " << r.confusion.fp << "\n"
      << "tn: " << r.confusion.tn << "\n"
      << "fn: " << r.confusion.fn << "\n"
      << "n_real: " << r.n_real << "\n"
      << "n_fake: " << r.n_fake << "\n"
      << "warnings: " << (r.warnings.empty() ? std::string("none") : join(r.warnings)) << "\n";
  return out.str();
}

}  // namespace dfdetect
