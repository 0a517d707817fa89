#include <cmath>
#include <random>

#include "doctest.h"
#include "dfdetect/fusion.hpp"
#include "dfdetect/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dfdetect;

namespace {

using Points = std::vector<std::pair<double, double>>;

Points xy(const RocCurve& c) {
  Points out;
  for (const auto& p : c.points) out.emplace_back(p.fpr, p.tpr);
  return out;
}

RocCurve curve_of(const std::vector<double>& s, const std::vector<int>& y) { return roc_curve(s, y); }

}  // namespace

TEST_SUITE("roc_curve") {
  TEST_CASE("examples") {
    CHECK(xy(curve_of({0.1, 0.9}, {0, 1})) == Points{{0, 0}, {0, 1}, {1, 1}});
    CHECK(xy(curve_of({0.3, 0.3, 0.3}, {0, 1, 1})) == Points{{0, 0}, {1, 1}});
    CHECK(xy(curve_of({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1})) == Points{{0, 0}, {0, .5}, {.5, .5}, {.5, 1}, {1, 1}});
  }

  TEST_CASE("structure: monotone rates, strictly decreasing thresholds, sentinel ends") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      const auto c = roc_curve(s.scores, s.labels);
      CHECK(c.points.front().fpr == 0.0);
      CHECK(c.points.front().tpr == 0.0);
      CHECK(std::isinf(c.points.front().threshold));
      CHECK(c.points.back().fpr == 1.0);
      CHECK(c.points.back().tpr == 1.0);
      for (std::size_t i = 1; i < c.points.size(); ++i) {
        CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
        CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
        CHECK(c.points[i].threshold < c.points[i - 1].threshold);
      }
    }
  }

  TEST_CASE("errors") {
    CHECK_ERROR(curve_of({0.1, 0.2}, {1, 1}), "metrics.single_class", "ROC undefined");
    CHECK_ERROR(curve_of({0.1}, {1, 0}), "metrics.length_mismatch", "");
    CHECK_ERROR(curve_of({0.1, NAN}, {1, 0}), "metrics.non_finite", "");
    CHECK_ERROR(curve_of({0.1, 0.2}, {1, 3}), "metrics.bad_label", "");
  }
}

TEST_SUITE("auc") {
  TEST_CASE("examples") {
    CHECK(auc(curve_of({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1})) == 1.0);
    CHECK(auc(curve_of({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1})) == 0.5);
    // Pairs (fake, real): (0.35, 0.1) ok, (0.35, 0.4) wrong, (0.8, *) ok: 3 of 4.
    CHECK(auc(curve_of({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1})) == 0.75);
  }

  TEST_CASE("equals the pairwise tie-corrected oracle") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 300; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      CHECK(std::abs(auc(roc_curve(s.scores, s.labels)) - oracle::pairwise_auc(s.scores, s.labels)) <= 1e-12);
    }
  }

  TEST_CASE("strictly increasing transforms leave the curve, AUC and EER unchanged") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      std::vector<double> t;
      for (double v : s.scores) t.push_back(trial % 2 ? std::exp(3.0 * v) - 7.0 : v * v * v + 2.0 * v);
      const auto a = roc_curve(s.scores, s.labels);
      const auto b = roc_curve(t, s.labels);
      CHECK(xy(a) == xy(b));
      CHECK(auc(a) == auc(b));
      CHECK(eer(a) == eer(b));
    }
  }

  TEST_CASE("complement symmetry") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 300; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      std::vector<double> c;
      for (double v : s.scores) c.push_back(1.0 - v);
      const auto fa = auc_fraction(roc_curve(s.scores, s.labels));
      const auto fc = auc_fraction(roc_curve(c, s.labels));
      CHECK(fa.denominator == fc.denominator);
      CHECK(fc.twice_area == fa.denominator - fa.twice_area);
      // Both sides are correctly rounded quotients of exact complements.
      CHECK(std::abs(fc.value() - (1.0 - fa.value())) <= 0x1p-53);
    }
  }

  TEST_CASE("label flip with negated scores preserves AUC") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      std::vector<double> neg;
      std::vector<int> flipped;
      for (std::size_t i = 0; i < s.scores.size(); ++i) {
        neg.push_back(-s.scores[i]);
        flipped.push_back(1 - s.labels[i]);
      }
      CHECK(auc(roc_curve(neg, flipped)) == auc(roc_curve(s.scores, s.labels)));
    }
  }
}

TEST_SUITE("eer") {
  TEST_CASE("examples") {
    CHECK(eer(curve_of({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1})) == 0.0);
    CHECK(eer(curve_of({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1})) == 1.0);
    CHECK(eer(curve_of({0.5, 0.5}, {0, 1})) == 0.5);
  }

  TEST_CASE("matches the dense threshold-grid oracle") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      CHECK(std::abs(eer(roc_curve(s.scores, s.labels)) - oracle::grid_eer(s.scores, s.labels)) <= 1e-3);
    }
  }

  TEST_CASE("bounds around the crossing") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      const auto c = roc_curve(s.scores, s.labels);
      const double e = eer(c);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
      for (std::size_t i = 1; i < c.points.size(); ++i) {
        const auto& a = c.points[i - 1];
        const auto& b = c.points[i];
        const bool brackets = a.fpr - (1 - a.tpr) <= 0 && b.fpr - (1 - b.tpr) >= 0;
        if (!brackets) continue;
        CHECK(e <= std::max(a.fpr, 1 - a.tpr) + 1e-15);
        CHECK(e <= std::max(b.fpr, 1 - b.tpr) + 1e-15);
        break;
      }
    }
  }
}

TEST_SUITE("f1") {
  TEST_CASE("examples") {
    const std::vector<int> y{0, 1, 1, 0, 1};
    const auto perfect = f1_per_class(y, y);
    CHECK(perfect.real == 1.0);
    CHECK(perfect.fake == 1.0);

    // TP=3, FP=1, FN=1, TN=5.
    const std::vector<int> truth{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
    const std::vector<int> pred{1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
    const auto c = confusion(pred, truth);
    CHECK((c.tp == 3 && c.fp == 1 && c.fn == 1 && c.tn == 5));
    CHECK(f1_per_class(pred, truth).fake == 0.75);
  }

  TEST_CASE("all predicted fake on the large test split counts") {
    // 76,594 real and 319,015 fake: f1_fake = 638030 / 714624 = 0.89281916084542...
    std::vector<int> truth(76594, 0);
    truth.resize(76594 + 319015, 1);
    const std::vector<int> pred(truth.size(), 1);
    const auto f = f1_per_class(pred, truth);
    CHECK(f.real == 0.0);
    CHECK(std::abs(f.fake - 0.8928191608454236) <= 1e-15);
  }

  TEST_CASE("errors") {
    CHECK_ERROR(f1_per_class(std::vector<int>{1}, std::vector<int>{1, 0}), "metrics.length_mismatch", "");
    CHECK_ERROR(f1_per_class(std::vector<int>{}, std::vector<int>{}), "metrics.empty", "");
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("perfect scores") {
    const auto r = evaluate(std::vector<double>{0.1, 0.2, 0.7, 0.9}, std::vector<int>{0, 0, 1, 1});
    CHECK(r.f1_real == 100.0);
    CHECK(r.f1_fake == 100.0);
    CHECK(r.accuracy == 100.0);
    CHECK(r.eer == 0.0);
    CHECK(r.auc == 100.0);
    CHECK(r.warnings.empty());
  }

  TEST_CASE("random 500-sample case matches naive recomputation") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 500; ++i) {
      const int label = u(rng) < 0.3 ? 0 : 1;
      y.push_back(label);
      s.push_back(std::round(std::clamp(u(rng) * 0.8 + 0.2 * label, 0.0, 1.0) * 200.0) / 200.0);
    }
    const double t = 0.5;
    const auto r = evaluate(s, y, t);
    const auto c = oracle::naive_confusion(s, y, t);
    CHECK(r.confusion.tp == c.tp);
    CHECK(r.confusion.fp == c.fp);
    CHECK(r.confusion.tn == c.tn);
    CHECK(r.confusion.fn == c.fn);
    const double tp = c.tp, fp = c.fp, tn = c.tn, fn = c.fn;
    CHECK(std::abs(r.f1_fake - 100.0 * 2 * tp / (2 * tp + fp + fn)) <= 1e-9);
    CHECK(std::abs(r.f1_real - 100.0 * 2 * tn / (2 * tn + fn + fp)) <= 1e-9);
    CHECK(std::abs(r.accuracy - 100.0 * (tp + tn) / 500.0) <= 1e-9);
    CHECK(std::abs(r.auc - 100.0 * oracle::pairwise_auc(s, y)) <= 1e-9);
    CHECK(std::abs(r.eer - 100.0 * oracle::grid_eer(s, y)) <= 1e-3 * 100.0);
  }

  TEST_CASE("confusion identities and percentage ranges hold") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = oracle::random_scored_sample(rng);
      const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const auto r = evaluate(s.scores, s.labels, t);
      CHECK(r.confusion.tp + r.confusion.fn == r.n_fake);
      CHECK(r.confusion.tn + r.confusion.fp == r.n_real);
      CHECK(r.accuracy == 100.0 * static_cast<double>(r.confusion.tp + r.confusion.tn) /
                              static_cast<double>(r.n_real + r.n_fake));
      for (double v : {r.f1_real, r.f1_fake, r.accuracy, r.eer, r.auc}) {
        CHECK(v >= 0.0);
        CHECK(v <= 100.0);
      }
    }
  }

  TEST_CASE("empty-support classes raise warnings") {
    const auto all_fake = evaluate(std::vector<double>{0.6, 0.7}, std::vector<int>{0, 1}, 0.5);
    CHECK(all_fake.f1_real == 0.0);
    CHECK(all_fake.warnings == std::vector<std::string>{"no_predicted_real"});
    const auto all_real = evaluate(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 1}, 0.5);
    CHECK(all_real.f1_fake == 0.0);
    CHECK(all_real.warnings == std::vector<std::string>{"no_predicted_fake"});
  }
}

TEST_SUITE("rendering") {
  TEST_CASE("table row fixture matches the golden file") {
    EvalReport r;
    r.f1_real = 71.2;
    r.f1_fake = 89.3;
    r.accuracy = 84.4;
    r.eer = 9.0;
    r.auc = 96.77;
    CHECK(render_table_row("AIMv2 + DINOv2 + ViT-L/14", r) + "\n" ==
          testutil::read_file(std::filesystem::path(DFDETECT_GOLDEN_DIR) / "table2_ensemble_row.txt"));
  }

  TEST_CASE("report document has a stable key order") {
    const auto r = evaluate(std::vector<double>{0.2, 0.6, 0.9, 0.4}, std::vector<int>{0, 0, 1, 1}, 0.5);
    EvalReport named = r;
    named.model_id = "a+b";
    named.member_ids = {"a", "b"};
    CHECK(render_report(named) ==
          "model_id: a+b\n"
          "member_ids: a,b\n"
          "f1_real: 50.0\n"
          "f1_fake: 50.0\n"
          "accuracy: 50.0\n"
          "eer: 50.0\n"
          "auc: 75.0\n"
          "threshold: 0.5\n"
          "tp: 1\n"
          "fp: 1\n"
          "tn: 1\n"
          "fn: 1\n"
          "n_real: 2\n"
          "n_fake: 2\n"
          "warnings: none\n");
  }
}
