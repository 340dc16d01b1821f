#pragma once

#include <functional>
#include <vector>

#include "lml/autodiff.hpp"
#include "lml/matrix.hpp"

namespace lml {

// Builds a scalar (1x1) objective graph from one leaf per parameter. Must be
// deterministic: grad_check re-invokes it for every finite-difference probe.
using GraphFn = std::function<NodePtr(const std::vector<NodePtr>&)>;

struct GradCheckReport {
  std::vector<double> max_rel_err;  // one entry per parameter
  double worst = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Compares the reverse-mode gradient of f against central finite differences
// (f(x+eps) - f(x-eps)) / (2 eps), entry by entry. The relative error is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckReport grad_check(const GraphFn& f, std::vector<Mat> params, double eps, double tol);

}  // namespace lml
