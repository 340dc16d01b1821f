#include "lml/expert.hpp"

#include "lml/cooc.hpp"
#include "lml/errors.hpp"

namespace lml {

ExpertSnapshot::ExpertSnapshot(const ModelParams& params, Mat corr_unnormalized, Mat h0)
    : params_(params), corr_(std::move(corr_unnormalized)), h0_(std::move(h0)) {
  if (corr_.rows() != corr_.cols() || corr_.rows() != h0_.rows()) {
    throw ShapeError("ExpertSnapshot: correlation " + shape_str(corr_) +
                     " vs embeddings " + shape_str(h0_));
  }
  adj_norm_ = row_normalize(corr_);
  stored_graph_ = gcn_forward(adj_norm_, h0_, params_.gcn);
}

Mat ExpertSnapshot::soft_labels(const Mat& features) const {
  return predict(adj_norm_, h0_, features, params_);
}

uint64_t ExpertSnapshot::state_checksum() const {
  uint64_t h = params_.checksum();
  h = checksum(corr_, h);
  h = checksum(h0_, h);
  return checksum(stored_graph_, h);
}

}  // namespace lml
