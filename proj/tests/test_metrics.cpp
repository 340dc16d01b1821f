#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lml/metrics.hpp"
#include "lml/rng.hpp"

using namespace lml;

namespace {

// O(n^2) ranked-precision oracle, written directly from the definition and
// sharing no code with the implementation. Ties resolve by original order.
double brute_force_ap(const Vec& scores, const Vec& labels) {
  const int n = static_cast<int>(scores.size());
  auto rank_of = [&](int p) {
    int rank = 1;
    for (int j = 0; j < n; ++j) {
      if (scores(j) > scores(p)) ++rank;
      if (scores(j) == scores(p) && j < p) ++rank;
    }
    return rank;
  };
  double sum = 0.0;
  int positives = 0;
  for (int p = 0; p < n; ++p) {
    if (labels(p) <= 0.5) continue;
    ++positives;
    const int rp = rank_of(p);
    int hits = 0;
    for (int q = 0; q < n; ++q) {
      if (labels(q) > 0.5 && rank_of(q) <= rp) ++hits;
    }
    sum += static_cast<double>(hits) / static_cast<double>(rp);
  }
  return sum / static_cast<double>(positives);
}

}  // namespace

TEST_CASE("average precision hand cases") {
  Vec s(2), l(2);
  s << 0.9, 0.1;
  l << 1, 0;
  CHECK(average_precision(s, l) == doctest::Approx(1.0));
  s << 0.1, 0.9;
  CHECK(average_precision(s, l) == doctest::Approx(0.5));
}

TEST_CASE("average precision matches the brute-force oracle on random inputs") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 10;
    Vec s(n), l(n);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      // Quantized scores so ties actually occur.
      s(i) = std::round(rng.uniform() * 4.0) / 4.0;
      l(i) = rng.uniform() < 0.4 ? 1.0 : 0.0;
      any = any || l(i) > 0.5;
    }
    if (!any) l(rng.uniform_int(n)) = 1.0;
    CHECK(std::abs(average_precision(s, l) - brute_force_ap(s, l)) <= 1e-12);
  }
}

TEST_CASE("average precision over every label pattern of length <= 8") {
  Rng rng(72);
  for (int n = 1; n <= 8; ++n) {
    Vec s(n);
    for (int i = 0; i < n; ++i) s(i) = rng.uniform();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      Vec l(n);
      for (int i = 0; i < n; ++i) l(i) = (mask >> i) & 1u ? 1.0 : 0.0;
      CHECK(std::abs(average_precision(s, l) - brute_force_ap(s, l)) <= 1e-12);
    }
  }
}

TEST_CASE("average precision depends only on the ranking") {
  Rng rng(73);
  Vec s(12), l(12);
  for (int i = 0; i < 12; ++i) {
    s(i) = rng.uniform(0.01, 0.99);
    l(i) = rng.uniform() < 0.5 ? 1.0 : 0.0;
  }
  l(0) = 1.0;
  const double base = average_precision(s, l);
  Vec affine = 0.3 * s + Vec::Constant(12, 0.1);
  Vec cubed = s.array().pow(3.0).matrix();
  CHECK(average_precision(affine, l) == base);
  CHECK(average_precision(cubed, l) == base);
}

TEST_CASE("average precision requires a positive") {
  Vec s(2), l = Vec::Zero(2);
  s << 0.1, 0.2;
  CHECK_THROWS_AS(average_precision(s, l), ConfigError);
}

TEST_CASE("macro and micro F1") {
  SUBCASE("perfect predictions") {
    Mat scores(2, 2), labels(2, 2);
    scores << 0.9, 0.1, 0.2, 0.8;
    labels << 1, 0, 0, 1;
    const F1Pair f1 = cf1_of1(scores, labels, 0.5);
    CHECK(f1.cf1 == doctest::Approx(1.0));
    CHECK(f1.of1 == doctest::Approx(1.0));
  }
  SUBCASE("all-negative predictions against positives") {
    Mat scores = Mat::Constant(3, 2, 0.1);
    Mat labels(3, 2);
    labels << 1, 0, 1, 1, 0, 0;
    CHECK(cf1_of1(scores, labels, 0.5).of1 == doctest::Approx(0.0));
  }
  SUBCASE("three-class pooled counts") {
    // Per class (TP, FP, FN) = (1,1,0), (2,0,0), (0,0,1):
    // micro F1 = 2*3 / (2*3 + 1 + 1) = 0.75.
    Mat scores(3, 3), labels(3, 3);
    scores << 0.9, 0.9, 0.1,   // row 0: predicts c0, c1
              0.9, 0.9, 0.1,   // row 1: predicts c0 (wrong), c1
              0.1, 0.1, 0.1;   // row 2: predicts nothing
    labels << 1, 1, 1,
              0, 1, 0,
              0, 0, 0;
    const F1Pair f1 = cf1_of1(scores, labels, 0.5);
    CHECK(f1.of1 == doctest::Approx(0.75));
    CHECK(f1.cf1 == doctest::Approx((2.0 / 3.0 + 1.0 + 0.0) / 3.0));
  }
  SUBCASE("empty classes count as zero in the macro mean") {
    Mat scores = Mat::Constant(2, 2, 0.1);
    Mat labels = Mat::Zero(2, 2);
    labels(0, 0) = 1.0;
    const F1Pair f1 = cf1_of1(scores, labels, 0.5);
    CHECK(f1.cf1 == doctest::Approx(0.0));
  }
  SUBCASE("threshold must be inside (0,1)") {
    CHECK_THROWS_AS(cf1_of1(Mat::Zero(1, 1), Mat::Zero(1, 1), 1.0), ConfigError);
  }
}

TEST_CASE("forgetting sign conventions") {
  MetricValues first{60.0, 50.0, 40.0};
  MetricValues final_same = first;
  CHECK(forgetting({first}, {final_same}).map == doctest::Approx(0.0));

  MetricValues worse{40.0, 45.0, 35.0};
  const ForgettingValues f = forgetting({first}, {worse});
  CHECK(f.map == doctest::Approx(20.0));
  CHECK(f.cf1 == doctest::Approx(5.0));

  MetricValues better{70.0, 55.0, 45.0};
  CHECK(forgetting({first}, {better}).map == doctest::Approx(-10.0));

  CHECK_THROWS_AS(forgetting({}, {}), ConfigError);
}

TEST_CASE("evaluate_seen on a tiny synthetic stream") {
  SyntheticConfig cfg;
  cfg.num_tasks = 2;
  cfg.classes_per_task = 2;
  cfg.feature_dim = 4;
  cfg.train_per_task = 4;
  cfg.test_per_task = 6;
  cfg.seed = 5;
  const TaskStream stream = generate_synthetic(cfg);

  Rng rng(9);
  ScoreFn score = [&](const Mat& features) {
    // Deterministic pseudo-scores from the features themselves.
    const int seen = 2;
    Mat s(features.rows(), seen);
    for (int r = 0; r < features.rows(); ++r) {
      for (int c = 0; c < seen; ++c) {
        s(r, c) = 1.0 / (1.0 + std::exp(-features(r, c)));
      }
    }
    return s;
  };

  const BoundaryReport at0 = evaluate_seen(score, stream, 0, 0.5, {}, {});
  CHECK(at0.t == 0);
  CHECK_FALSE(at0.forget.has_value());
  CHECK(at0.per_task.size() == 1);

  // Single-partition aggregate is just that partition's metrics.
  const auto& test = stream.tasks[0].test;
  const Mat features = batch_features(test, 0, static_cast<int>(test.size()));
  const MetricValues direct =
      score_metrics(score(features), full_label_matrix(test, 2), 0.5);
  CHECK(at0.aggregate.map == doctest::Approx(direct.map));
  CHECK(at0.aggregate.cf1 == doctest::Approx(direct.cf1));

  // Evaluating twice gives identical reports.
  const BoundaryReport again = evaluate_seen(score, stream, 0, 0.5, {}, {});
  CHECK(again.aggregate.map == at0.aggregate.map);
  CHECK(again.per_task[0].of1 == at0.per_task[0].of1);
}
