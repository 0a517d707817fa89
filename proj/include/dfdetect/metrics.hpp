#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dfdetect {

// Labels are 0 = real, 1 = fake; fake is the positive class and a sample is
// predicted fake when score >= threshold.

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
  std::size_t fp = 0;  // real samples with score >= threshold
  std::size_t tp = 0;  // fake samples with score >= threshold
};

/// Tie-collapsed ROC: a (0,0) sentinel at +inf, then one point per distinct
/// score in descending order; the last point is (1,1).
struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t n_real = 0;
  std::size_t n_fake = 0;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area as an exact rational: auc = twice_area / (2 n_real n_fake).
struct AucFraction {
  std::uint64_t twice_area = 0;
  std::uint64_t denominator = 0;
  double value() const { return static_cast<double>(twice_area) / static_cast<double>(denominator); }
};

AucFraction auc_fraction(const RocCurve& curve);
double auc(const RocCurve& curve);

/// Point where fpr = 1 - tpr, linearly interpolated along the ROC polyline.
double eer(const RocCurve& curve);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

Confusion confusion(std::span<const int> predicted, std::span<const int> truth);

struct F1Scores {
  double real = 0.0;
  double fake = 0.0;
};

/// F1 = 2 TP / (2 TP + FP + FN) per class, 0 when undefined.
F1Scores f1_per_class(std::span<const int> predicted, std::span<const int> truth);

/// One row of the evaluation table. Rates are percentages, unrounded.
struct EvalReport {
  std::string model_id;
  std::vector<std::string> member_ids;  // non-empty for fused scores
  double f1_real = 0.0;
  double f1_fake = 0.0;
  double accuracy = 0.0;
  double eer = 0.0;
  double auc = 0.0;
  double threshold = 0.5;
  Confusion confusion;
  std::size_t n_real = 0;
  std::size_t n_fake = 0;
  std::vector<std::string> warnings;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

/// "name & f1_real & f1_fake & accuracy & eer & auc", one decimal each.
std::string render_table_row(const std::string& name, const EvalReport& report);

/// Stable key: value document; percentages rendered with one decimal.
std::string render_report(const EvalReport& report);

}  // namespace dfdetect
