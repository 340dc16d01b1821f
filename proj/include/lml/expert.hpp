#pragma once

#include <cstdint>

#include "lml/matrix.hpp"
#include "lml/model.hpp"

namespace lml {

// Frozen copy of the model taken at a task boundary. During the next task it
// serves soft labels for the classes it was trained on and the stored graph
// representation those classes had, both computed from its own frozen
// correlation matrix and embeddings. Immutable after construction, so safe
// to read from anywhere.
class ExpertSnapshot {
 public:
  // corr_unnormalized is the assembled correlation matrix at snapshot time;
  // h0 the embedding rows for the classes seen so far. The graph
  // representation is computed once here and cached (its inputs are frozen,
  // recomputing per batch would only burn cycles).
  ExpertSnapshot(const ModelParams& params, Mat corr_unnormalized, Mat h0);

  // Soft labels over the snapshot's seen classes, one row per input row.
  // No gradient ever flows here; outputs are plain matrices.
  Mat soft_labels(const Mat& features) const;

  // Cached graph representation (seen x D); identical on every call.
  const Mat& stored_graph() const { return stored_graph_; }

  const ModelParams& params() const { return params_; }
  const Mat& correlation() const { return corr_; }
  const Mat& embeddings() const { return h0_; }
  int seen_count() const { return static_cast<int>(h0_.rows()); }

  // Over parameters, correlation, embeddings and the cached graph; the
  // trainer audits this every step to prove the snapshot never moves.
  uint64_t state_checksum() const;

 private:
  ModelParams params_;
  Mat corr_;
  Mat h0_;
  Mat adj_norm_;
  Mat stored_graph_;
};

}  // namespace lml
