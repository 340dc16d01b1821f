#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lml/dataset.hpp"
#include "lml/matrix.hpp"

namespace lml {

// Average precision of one class: mean over the positives, ranked by
// descending score (ties broken by stable original order), of the precision
// at each positive's rank. Requires at least one positive; callers skip
// classes without positives.
double average_precision(const Vec& scores, const Vec& labels);

struct F1Pair {
  double cf1 = 0.0;  // per-class (macro) F1, fractions in [0, 1]
  double of1 = 0.0;  // micro F1 over pooled TP/FP/FN
};

// Binarizes scores at `threshold` (strictly greater) and computes macro and
// micro F1. Classes with neither predicted nor actual positives contribute
// an F1 of zero and stay in the macro mean.
F1Pair cf1_of1(const Mat& scores, const Mat& labels, double threshold);

// All three metrics in percent over one score/label matrix pair.
struct MetricValues {
  double map = 0.0;
  double cf1 = 0.0;
  double of1 = 0.0;
};
MetricValues score_metrics(const Mat& scores, const Mat& labels, double threshold);

// Forgetting of one metric: first-trained score minus final score, averaged
// over the old tasks. Positive means degradation.
struct ForgettingValues {
  double map = 0.0;
  double cf1 = 0.0;
  double of1 = 0.0;
};
ForgettingValues forgetting(const std::vector<MetricValues>& first,
                            const std::vector<MetricValues>& final_scores);

// Evaluation after task t (0-based): aggregate metrics over the union of
// test sets of tasks 0..t, per-task rows on each task's own test set (labels
// restricted to the classes seen at evaluation time), and forgetting against
// the cached first-trained rows. `first_trained` holds rows for tasks 0..t-1
// captured at their own boundaries; forgetting is absent at t = 0.
struct BoundaryReport {
  int t = 0;
  MetricValues aggregate;
  std::vector<MetricValues> per_task;
  std::optional<ForgettingValues> forget;
  // Informational second reading: mean of past aggregate scores minus the
  // current aggregate.
  std::optional<ForgettingValues> forget_aggregate;
};

// Scores for a feature batch over all currently seen classes.
using ScoreFn = std::function<Mat(const Mat& features)>;

BoundaryReport evaluate_seen(const ScoreFn& score, const TaskStream& stream, int t,
                             double threshold,
                             const std::vector<MetricValues>& first_trained,
                             const std::vector<MetricValues>& past_aggregates);

}  // namespace lml
