#pragma once

#include "lml/autodiff.hpp"
#include "lml/matrix.hpp"

namespace lml {

struct LossWeights {
  double cls = 1.0;  // classification on the current task's classes
  double dst = 0.0;  // distillation against expert soft labels
  double gph = 0.0;  // graph-representation preservation

  void validate() const;  // non-negative, throws ConfigError naming the field
};

struct LossOptions {
  // The distillation sum over old classes is averaged over the batch by
  // default; the preservation term is a pure sum over old rows. Both
  // readings stay runnable through these switches.
  bool dst_batch_mean = true;
  bool gph_row_mean = false;
  double clamp_eps = 1e-12;  // probability clamp before logarithms
};

// Per-class binary cross-entropy against hard task labels, averaged over
// classes and batch. targets is batch x |C_t| with 0/1 entries, scores_new
// the matching sigmoid outputs.
NodePtr cls_loss(const Mat& targets, const NodePtr& scores_new,
                 const LossOptions& opt = {});

// Cross-entropy between expert soft labels and the old-class scores, summed
// over old classes (batch-averaged per options). The soft labels enter as
// constants: no gradient reaches the expert.
NodePtr dst_loss(const Mat& soft_targets, const NodePtr& scores_old,
                 const LossOptions& opt = {});

// Squared L2 distance between the stored graph rows and the first rows of
// the current graph representation; rows for new classes are unconstrained.
NodePtr gph_loss(const Mat& stored_graph, const NodePtr& graph_repr,
                 const LossOptions& opt = {});

// Weighted sum of the three terms. scores is batch x |C_seen|, split into
// old/new at old_count. With old_count == 0 (first task) only the
// classification term exists and soft_targets/stored_graph are ignored.
NodePtr total_loss(const Mat& targets, const NodePtr& scores, const Mat& soft_targets,
                   const Mat& stored_graph, const NodePtr& graph_repr, int old_count,
                   const LossWeights& w, const LossOptions& opt = {});

}  // namespace lml
