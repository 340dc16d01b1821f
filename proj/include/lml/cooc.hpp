#pragma once

#include <string>
#include <vector>

#include "lml/matrix.hpp"

namespace lml {

// Streaming label co-occurrence statistics for the task being trained.
//
// The assembled matrix over all seen classes has four blocks:
//
//     [ old-old   old-new ]   old-old: frozen conditionals from past tasks
//     [ new-old   new-new ]   new-new: hard-label counts from this task
//
// New-new entries are P(i|j) = N_ij / N_j from the hard task labels. The
// old-class rows/columns cannot be counted directly (old ground truth is
// unavailable), so they come from expert soft labels: old-new is
// sum_x z_i y_j / N_j and new-old follows from Bayes' rule as
// sum_x z_i y_j / sum_x z_i. Everything is accumulated one mini-batch at a
// time; a single trainer thread mutates the state, assembled snapshots are
// plain matrices and freely shareable.
class CoocStats {
 public:
  // First task: pass an empty (0x0) frozen block.
  CoocStats(Mat frozen_old, int new_classes);

  // Hard-label counts over the current task's classes; rows are examples,
  // entries must be 0/1 and the width must equal the task's class count.
  void update_hard(const Mat& task_labels);

  // Expert soft labels (rows aligned with task_labels) accumulate the
  // old-class sums. soft_old entries must lie in [0, 1].
  void update_soft(const Mat& soft_old, const Mat& task_labels);

  // Unnormalized conditional-probability matrix over all seen classes.
  // Unseen condition classes (N_j = 0 or S_i = 0) yield zero columns/rows
  // except for the unit diagonal of the new-new block. With
  // zero_inter_task the old-new and new-old blocks are forced to zero.
  Mat assemble(bool zero_inter_task = false) const;

  int old_count() const { return static_cast<int>(frozen_old_.rows()); }
  int new_count() const { return new_count_; }
  int seen_count() const { return old_count() + new_count_; }

  const Mat& frozen_old() const { return frozen_old_; }
  const Vec& positive_count() const { return n_pos_; }     // N_j
  const Mat& pair_count() const { return n_pair_; }        // N_ij (diag = N_j)
  const Vec& soft_sum() const { return soft_sum_; }        // S_i
  const Mat& cross_sum() const { return cross_sum_; }      // sum_x z_i y_j

 private:
  Mat frozen_old_;
  int new_count_;
  Vec n_pos_;
  Mat n_pair_;
  Vec soft_sum_;
  Mat cross_sum_;
};

// Row-stochastic propagation matrix D^{-1} (A + I); every row sums to one.
// The correlation matrix is asymmetric by construction, so a symmetric
// Laplacian normalization would be ill-posed here.
Mat row_normalize(const Mat& a);

// CSV with one header row of class names; round-trips doubles exactly.
void write_matrix_csv(const std::string& path, const std::vector<std::string>& names,
                      const Mat& m);
Mat read_matrix_csv(const std::string& path);

}  // namespace lml
