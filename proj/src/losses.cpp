#include "lml/losses.hpp"

#include "lml/errors.hpp"

namespace lml {

void LossWeights::validate() const {
  if (cls < 0.0) throw ConfigError("loss weight lambda1 must be non-negative");
  if (dst < 0.0) throw ConfigError("loss weight lambda2 must be non-negative");
  if (gph < 0.0) throw ConfigError("loss weight lambda3 must be non-negative");
}

namespace {

// -(t log p + (1 - t) log(1 - p)) summed over all entries, with targets held
// constant. Probabilities are clamped before the logs so saturated sigmoids
// cannot produce log(0).
NodePtr bce_sum(const Mat& targets, const NodePtr& probs, double eps) {
  require_same_shape(targets, probs->value, "cross_entropy");
  const Mat ones = Mat::Ones(targets.rows(), targets.cols());
  auto p = clamp(probs, eps, 1.0 - eps);
  auto pos = mul(make_constant(targets), log_elem(p));
  auto neg = mul(make_constant(ones - targets), log_elem(sub(make_constant(ones), p)));
  return scalar_mul(sum(add(pos, neg)), -1.0);
}

}  // namespace

NodePtr cls_loss(const Mat& targets, const NodePtr& scores_new, const LossOptions& opt) {
  const double denom = static_cast<double>(targets.rows()) * static_cast<double>(targets.cols());
  return scalar_mul(bce_sum(targets, scores_new, opt.clamp_eps), 1.0 / denom);
}

NodePtr dst_loss(const Mat& soft_targets, const NodePtr& scores_old, const LossOptions& opt) {
  if (((soft_targets.array() < 0.0) || (soft_targets.array() > 1.0)).any()) {
    throw ConfigError("dst_loss: soft targets must lie in [0, 1]");
  }
  const double denom = opt.dst_batch_mean ? static_cast<double>(soft_targets.rows()) : 1.0;
  return scalar_mul(bce_sum(soft_targets, scores_old, opt.clamp_eps), 1.0 / denom);
}

NodePtr gph_loss(const Mat& stored_graph, const NodePtr& graph_repr, const LossOptions& opt) {
  const int n_old = static_cast<int>(stored_graph.rows());
  if (graph_repr->value.rows() < n_old) {
    throw ShapeError("gph_loss: stored graph has " + std::to_string(n_old) +
                     " rows but current representation only " +
                     std::to_string(graph_repr->value.rows()));
  }
  if (graph_repr->value.cols() != stored_graph.cols()) {
    throw ShapeError("gph_loss: width mismatch " + shape_str(stored_graph) + " vs " +
                     shape_str(graph_repr->value));
  }
  auto diff = sub(slice_rows(graph_repr, 0, n_old), make_constant(stored_graph));
  const double denom = opt.gph_row_mean && n_old > 0 ? static_cast<double>(n_old) : 1.0;
  return scalar_mul(sum(square(diff)), 1.0 / denom);
}

NodePtr total_loss(const Mat& targets, const NodePtr& scores, const Mat& soft_targets,
                   const Mat& stored_graph, const NodePtr& graph_repr, int old_count,
                   const LossWeights& w, const LossOptions& opt) {
  w.validate();
  const int seen = static_cast<int>(scores->value.cols());
  if (old_count < 0 || old_count >= seen) {
    throw ShapeError("total_loss: old class count " + std::to_string(old_count) +
                     " inconsistent with " + std::to_string(seen) + " seen classes");
  }
  auto scores_new = slice_cols(scores, old_count, seen - old_count);
  NodePtr loss = scalar_mul(cls_loss(targets, scores_new, opt), w.cls);
  if (old_count > 0) {
    auto scores_old = slice_cols(scores, 0, old_count);
    loss = add(loss, scalar_mul(dst_loss(soft_targets, scores_old, opt), w.dst));
    loss = add(loss, scalar_mul(gph_loss(stored_graph, graph_repr, opt), w.gph));
  }
  return loss;
}

}  // namespace lml
