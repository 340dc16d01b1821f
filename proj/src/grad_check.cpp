#include "lml/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "lml/errors.hpp"

namespace lml {

namespace {

double evaluate(const GraphFn& f, const std::vector<Mat>& params) {
  std::vector<NodePtr> leaves;
  leaves.reserve(params.size());
  for (const Mat& p : params) leaves.push_back(make_leaf(p));
  NodePtr root = f(leaves);
  if (root->value.rows() != 1 || root->value.cols() != 1) {
    throw ShapeError("grad_check: objective must be 1x1, got " + shape_str(root->value));
  }
  const double v = root->value(0, 0);
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite objective value");
  return v;
}

}  // namespace

GradCheckReport grad_check(const GraphFn& f, std::vector<Mat> params, double eps, double tol) {
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");

  // One reverse-mode pass gives every analytic gradient at once.
  std::vector<NodePtr> leaves;
  leaves.reserve(params.size());
  for (const Mat& p : params) leaves.push_back(make_leaf(p));
  NodePtr root = f(leaves);
  if (root->value.rows() != 1 || root->value.cols() != 1) {
    throw ShapeError("grad_check: objective must be 1x1, got " + shape_str(root->value));
  }
  if (!std::isfinite(root->value(0, 0))) {
    throw NumericError("grad_check: non-finite objective value");
  }
  backward(root);

  GradCheckReport report;
  report.tol = tol;
  report.max_rel_err.assign(params.size(), 0.0);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Mat& p = params[pi];
    const Mat& analytic = leaves[pi]->grad;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        const double saved = p(r, c);
        p(r, c) = saved + eps;
        const double plus = evaluate(f, params);
        p(r, c) = saved - eps;
        const double minus = evaluate(f, params);
        p(r, c) = saved;
        const double numeric = (plus - minus) / (2.0 * eps);
        const double a = analytic(r, c);
        const double rel =
            std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        report.max_rel_err[pi] = std::max(report.max_rel_err[pi], rel);
      }
    }
    report.worst = std::max(report.worst, report.max_rel_err[pi]);
  }
  report.pass = report.worst <= tol;
  return report;
}

}  // namespace lml
