#include "lml/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "lml/errors.hpp"

namespace lml {

double average_precision(const Vec& scores, const Vec& labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("average_precision: " + std::to_string(scores.size()) +
                     " scores vs " + std::to_string(labels.size()) + " labels");
  }
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  int positives = 0;
  double sum_precision = 0.0;
  for (int rank = 0; rank < n; ++rank) {
    if (labels(order[static_cast<size_t>(rank)]) > 0.5) {
      ++positives;
      sum_precision += static_cast<double>(positives) / static_cast<double>(rank + 1);
    }
  }
  if (positives == 0) {
    throw ConfigError("average_precision: no positive labels (caller must skip)");
  }
  return sum_precision / static_cast<double>(positives);
}

F1Pair cf1_of1(const Mat& scores, const Mat& labels, double threshold) {
  require_same_shape(scores, labels, "cf1_of1");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("cf1_of1: threshold must lie in (0, 1)");
  }
  const Eigen::Index classes = scores.cols();
  double macro_sum = 0.0;
  double tp_all = 0.0, fp_all = 0.0, fn_all = 0.0;
  for (Eigen::Index c = 0; c < classes; ++c) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const bool predicted = scores(r, c) > threshold;
      const bool actual = labels(r, c) > 0.5;
      if (predicted && actual) tp += 1.0;
      if (predicted && !actual) fp += 1.0;
      if (!predicted && actual) fn += 1.0;
    }
    const double denom = 2.0 * tp + fp + fn;
    macro_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  F1Pair out;
  out.cf1 = classes > 0 ? macro_sum / static_cast<double>(classes) : 0.0;
  const double denom = 2.0 * tp_all + fp_all + fn_all;
  out.of1 = denom > 0.0 ? 2.0 * tp_all / denom : 0.0;
  return out;
}

MetricValues score_metrics(const Mat& scores, const Mat& labels, double threshold) {
  require_same_shape(scores, labels, "score_metrics");
  double ap_sum = 0.0;
  int ap_classes = 0;
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    // Classes without positives in this partition have undefined AP and are
    // excluded from the mean.
    if ((labels.col(c).array() > 0.5).any()) {
      ap_sum += average_precision(scores.col(c), labels.col(c));
      ++ap_classes;
    }
  }
  const F1Pair f1 = cf1_of1(scores, labels, threshold);
  MetricValues v;
  v.map = ap_classes > 0 ? 100.0 * ap_sum / static_cast<double>(ap_classes) : 0.0;
  v.cf1 = 100.0 * f1.cf1;
  v.of1 = 100.0 * f1.of1;
  return v;
}

ForgettingValues forgetting(const std::vector<MetricValues>& first,
                            const std::vector<MetricValues>& final_scores) {
  if (first.size() != final_scores.size() || first.empty()) {
    throw ConfigError("forgetting: need matching, non-empty first/final score lists");
  }
  ForgettingValues f;
  for (size_t k = 0; k < first.size(); ++k) {
    f.map += first[k].map - final_scores[k].map;
    f.cf1 += first[k].cf1 - final_scores[k].cf1;
    f.of1 += first[k].of1 - final_scores[k].of1;
  }
  const double n = static_cast<double>(first.size());
  f.map /= n;
  f.cf1 /= n;
  f.of1 /= n;
  return f;
}

BoundaryReport evaluate_seen(const ScoreFn& score, const TaskStream& stream, int t,
                             double threshold,
                             const std::vector<MetricValues>& first_trained,
                             const std::vector<MetricValues>& past_aggregates) {
  if (t < 0 || t >= stream.num_tasks()) {
    throw ConfigError("evaluate_seen: task index " + std::to_string(t) + " out of range");
  }
  if (static_cast<int>(first_trained.size()) != t) {
    throw ConfigError("evaluate_seen: expected " + std::to_string(t) +
                      " cached first-trained rows, got " +
                      std::to_string(first_trained.size()));
  }
  const int seen = stream.labels.seen_after(t);

  BoundaryReport report;
  report.t = t;
  report.per_task.reserve(static_cast<size_t>(t) + 1);

  std::vector<Mat> task_scores;
  std::vector<Mat> task_labels;
  Eigen::Index total_rows = 0;
  for (int k = 0; k <= t; ++k) {
    const auto& test = stream.tasks[static_cast<size_t>(k)].test;
    const Mat features = batch_features(test, 0, static_cast<int>(test.size()));
    Mat s = score(features);
    if (s.cols() != seen || s.rows() != features.rows()) {
      throw ShapeError("evaluate_seen: score matrix " + shape_str(s) + ", expected " +
                       std::to_string(features.rows()) + "x" + std::to_string(seen));
    }
    Mat l = full_label_matrix(test, seen);
    report.per_task.push_back(score_metrics(s, l, threshold));
    total_rows += s.rows();
    task_scores.push_back(std::move(s));
    task_labels.push_back(std::move(l));
  }

  Mat all_scores(total_rows, seen);
  Mat all_labels(total_rows, seen);
  Eigen::Index row = 0;
  for (size_t k = 0; k < task_scores.size(); ++k) {
    all_scores.middleRows(row, task_scores[k].rows()) = task_scores[k];
    all_labels.middleRows(row, task_labels[k].rows()) = task_labels[k];
    row += task_scores[k].rows();
  }
  report.aggregate = score_metrics(all_scores, all_labels, threshold);

  if (t > 0) {
    std::vector<MetricValues> final_rows(report.per_task.begin(),
                                         report.per_task.begin() + t);
    report.forget = forgetting(first_trained, final_rows);
    if (static_cast<int>(past_aggregates.size()) == t) {
      ForgettingValues agg;
      for (const auto& past : past_aggregates) {
        agg.map += past.map - report.aggregate.map;
        agg.cf1 += past.cf1 - report.aggregate.cf1;
        agg.of1 += past.of1 - report.aggregate.of1;
      }
      const double n = static_cast<double>(past_aggregates.size());
      agg.map /= n;
      agg.cf1 /= n;
      agg.of1 /= n;
      report.forget_aggregate = agg;
    }
  }
  return report;
}

}  // namespace lml
