#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lml/grad_check.hpp"
#include "lml/losses.hpp"
#include "lml/rng.hpp"

using namespace lml;

namespace {

Mat random_mat(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

}  // namespace

TEST_CASE("classification loss hand values") {
  Mat y = Mat::Ones(1, 1);
  CHECK(cls_loss(y, make_leaf(Mat::Constant(1, 1, 1.0 - 1e-9)))->value(0, 0) ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(cls_loss(y, make_leaf(Mat::Constant(1, 1, 0.5)))->value(0, 0) ==
        doctest::Approx(std::log(2.0)));

  // Per-class mean: two classes at 0.5 still cost ln 2 per element.
  Mat y2 = Mat::Ones(1, 2);
  CHECK(cls_loss(y2, make_leaf(Mat::Constant(1, 2, 0.5)))->value(0, 0) ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("classification gradient wrt logits is (p - y) / classes") {
  Mat y(1, 3);
  y << 1, 0, 1;
  Mat logits_v(1, 3);
  logits_v << 0.3, -0.2, 1.4;
  auto logits = make_leaf(logits_v);
  auto probs = sigmoid(logits);
  auto loss = cls_loss(y, probs);
  backward(loss);
  for (int c = 0; c < 3; ++c) {
    const double p = probs->value(0, c);
    CHECK(logits->grad(0, c) == doctest::Approx((p - y(0, c)) / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("distillation loss at the match point equals the soft-label entropy") {
  Mat z(1, 3);
  z << 0.2, 0.7, 0.5;
  auto probs = make_leaf(z);
  const double loss = dst_loss(z, probs)->value(0, 0);
  double entropy = 0.0;
  for (int c = 0; c < 3; ++c) {
    entropy -= z(0, c) * std::log(z(0, c)) + (1 - z(0, c)) * std::log(1 - z(0, c));
  }
  CHECK(loss == doctest::Approx(entropy).epsilon(1e-12));
}

TEST_CASE("distillation gradient wrt logit is p - z") {
  Mat z = Mat::Constant(1, 2, 0.5);
  Mat logits_v(1, 2);
  logits_v << 0.9, -0.4;
  auto logits = make_leaf(logits_v);
  auto loss = dst_loss(z, sigmoid(logits));
  backward(loss);
  for (int c = 0; c < 2; ++c) {
    const double p = 1.0 / (1.0 + std::exp(-logits_v(0, c)));
    CHECK(logits->grad(0, c) == doctest::Approx(p - 0.5).epsilon(1e-12));
  }
}

TEST_CASE("gradient descent on free logits converges to the soft labels") {
  Mat z(1, 2);
  z << 0.3, 0.8;
  Mat logits = Mat::Zero(1, 2);
  for (int step = 0; step < 4000; ++step) {
    auto leaf = make_leaf(logits);
    auto loss = dst_loss(z, sigmoid(leaf));
    backward(loss);
    logits -= 0.5 * leaf->grad;
  }
  const Mat probs = logits.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  CHECK(probs(0, 0) == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(probs(0, 1) == doctest::Approx(0.8).epsilon(1e-4));
}

TEST_CASE("graph preservation loss hand values") {
  Rng rng(61);
  const Mat g = random_mat(rng, 3, 4);
  CHECK(gph_loss(g, make_leaf(g))->value(0, 0) == doctest::Approx(0.0));

  Mat gp(1, 2);
  gp << 0.0, 0.0;
  Mat h(2, 2);
  h << 3.0, 4.0, 9.0, 9.0;  // second row is a new class, unconstrained
  CHECK(gph_loss(gp, make_leaf(h))->value(0, 0) == doctest::Approx(25.0));
}

TEST_CASE("graph preservation gradient: 2(h - g) on old rows, zero on new") {
  Rng rng(62);
  const Mat g = random_mat(rng, 2, 3);
  const Mat h_v = random_mat(rng, 4, 3);
  auto h = make_leaf(h_v);
  auto loss = gph_loss(g, h);
  backward(loss);
  const Mat expected = 2.0 * (h_v.topRows(2) - g);
  CHECK((h->grad.topRows(2) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(h->grad.bottomRows(2) == Mat::Zero(2, 3));
}

TEST_CASE("all three losses are non-negative on random inputs") {
  Rng rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat y = random_mat(rng, 2, 3, 0.0, 1.0).unaryExpr([](double v) {
      return v > 0.5 ? 1.0 : 0.0;
    });
    const Mat p = random_mat(rng, 2, 3, 0.01, 0.99);
    const Mat z = random_mat(rng, 2, 3, 0.0, 1.0);
    const Mat g = random_mat(rng, 2, 3);
    const Mat h = random_mat(rng, 3, 3);
    CHECK(cls_loss(y, make_leaf(p))->value(0, 0) >= 0.0);
    CHECK(dst_loss(z, make_leaf(p))->value(0, 0) >= 0.0);
    CHECK(gph_loss(g, make_leaf(h))->value(0, 0) >= 0.0);
  }
}

TEST_CASE("total loss composition") {
  Rng rng(64);
  const int old_count = 2, new_count = 3, batch = 2;
  const Mat y = random_mat(rng, batch, new_count, 0.0, 1.0).unaryExpr([](double v) {
    return v > 0.5 ? 1.0 : 0.0;
  });
  const Mat scores_v = random_mat(rng, batch, old_count + new_count, 0.05, 0.95);
  const Mat z = random_mat(rng, batch, old_count, 0.1, 0.9);
  const Mat g = random_mat(rng, old_count, 3);
  const Mat h_v = random_mat(rng, old_count + new_count, 3);

  SUBCASE("weighted sum of the three terms") {
    const LossWeights w{0.07, 0.93, 1e5};  // the accepted best configuration
    auto scores = make_leaf(scores_v);
    auto h = make_leaf(h_v);
    const double total = total_loss(y, scores, z, g, h, old_count, w)->value(0, 0);
    const double cls = cls_loss(y, slice_cols(make_leaf(scores_v), old_count, new_count))
                           ->value(0, 0);
    const double dst = dst_loss(z, slice_cols(make_leaf(scores_v), 0, old_count))->value(0, 0);
    const double gph = gph_loss(g, make_leaf(h_v))->value(0, 0);
    CHECK(total == doctest::Approx(0.07 * cls + 0.93 * dst + 1e5 * gph).epsilon(1e-12));
  }
  SUBCASE("distillation and preservation switched off") {
    const LossWeights w{0.4, 0.0, 0.0};
    const double total =
        total_loss(y, make_leaf(scores_v), z, g, make_leaf(h_v), old_count, w)->value(0, 0);
    const double cls = cls_loss(y, slice_cols(make_leaf(scores_v), old_count, new_count))
                           ->value(0, 0);
    CHECK(total == doctest::Approx(0.4 * cls).epsilon(1e-12));
  }
  SUBCASE("first task reduces to the classification term") {
    const LossWeights w{0.07, 0.93, 1e5};
    const Mat y1 = random_mat(rng, batch, new_count, 0.0, 1.0).unaryExpr([](double v) {
      return v > 0.5 ? 1.0 : 0.0;
    });
    const Mat s1 = random_mat(rng, batch, new_count, 0.05, 0.95);
    const double total =
        total_loss(y1, make_leaf(s1), Mat(), Mat(), make_leaf(h_v), 0, w)->value(0, 0);
    CHECK(total == doctest::Approx(0.07 * cls_loss(y1, make_leaf(s1))->value(0, 0)));
  }
  SUBCASE("doubling every weight doubles the loss") {
    const LossWeights w{0.2, 0.3, 2.0};
    const LossWeights w2{0.4, 0.6, 4.0};
    const double a =
        total_loss(y, make_leaf(scores_v), z, g, make_leaf(h_v), old_count, w)->value(0, 0);
    const double b =
        total_loss(y, make_leaf(scores_v), z, g, make_leaf(h_v), old_count, w2)->value(0, 0);
    CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-12));
  }
  SUBCASE("negative weights are rejected") {
    const LossWeights w{-0.1, 0.5, 0.0};
    CHECK_THROWS_AS(
        total_loss(y, make_leaf(scores_v), z, g, make_leaf(h_v), old_count, w),
        ConfigError);
  }
}

TEST_CASE("loss gradients pass the finite-difference check end to end") {
  Rng rng(65);
  const int old_count = 2, new_count = 2, batch = 2, dim = 3;
  const Mat y = random_mat(rng, batch, new_count, 0.0, 1.0).unaryExpr([](double v) {
    return v > 0.5 ? 1.0 : 0.0;
  });
  const Mat z = random_mat(rng, batch, old_count, 0.1, 0.9);
  const Mat g = random_mat(rng, old_count, dim);
  const LossWeights w{0.07, 0.93, 1.0};

  // Parameters: logits (batch x seen) and graph rows (seen x dim).
  GraphFn f = [&](const std::vector<NodePtr>& p) {
    auto scores = sigmoid(p[0]);
    return total_loss(y, scores, z, g, p[1], old_count, w);
  };
  const auto report = grad_check(
      f, {random_mat(rng, batch, old_count + new_count), random_mat(rng, old_count + new_count, dim)},
      1e-5, 1e-4);
  CHECK(report.pass);
}
