#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lml/autodiff.hpp"
#include "lml/matrix.hpp"

namespace lml {

// Fixed per-class graph node embeddings. Each row is a unit-norm Gaussian
// vector derived from (seed, global class index), so a class keeps the same
// row forever and growth only appends.
class ClassEmbeddings {
 public:
  ClassEmbeddings(int dim, uint64_t seed);

  // Appends one row per new class; throws ConfigError on duplicate names.
  void grow(const std::vector<std::string>& new_names);

  const Mat& rows() const { return rows_; }
  int count() const { return static_cast<int>(rows_.rows()); }
  int dim() const { return dim_; }

 private:
  Mat rows_;
  std::vector<std::string> names_;
  int dim_;
  uint64_t seed_;
};

struct ModelDims {
  int feature_dim = 0;       // input vector width
  int backbone_hidden = 64;  // m
  int embed_dim = 16;        // d, node embedding width
  int gcn_hidden = 32;       // h
  int repr_dim = 32;         // D, shared representation width
};

// Two-layer graph convolution: H1 = lrelu(adj H0 W1), H = adj H1 W2. The
// second layer stays linear so the output rows act as per-class classifier
// vectors under the final sigmoid.
struct GcnParams {
  Mat w1;  // d x h
  Mat w2;  // h x D
  double leaky_slope = 0.2;
};

// Feature backbone: one-hidden-layer perceptron standing in for an image
// CNN, mapping d_f -> D.
struct BackboneParams {
  Mat v1;  // d_f x m
  Mat v2;  // m x D
  double leaky_slope = 0.2;
};

struct ModelParams {
  BackboneParams backbone;
  GcnParams gcn;

  static ModelParams init(const ModelDims& dims, uint64_t seed);

  std::vector<Mat*> tensors();
  std::vector<const Mat*> tensors() const;
  static const std::vector<std::string>& tensor_names();
  uint64_t checksum() const;
};

// Plain (gradient-free) forward paths; used by evaluation and the expert.
Mat gcn_forward(const Mat& adj_norm, const Mat& h0, const GcnParams& p);
Mat backbone_forward(const Mat& features, const BackboneParams& p);
// Batch scores in (0,1): sigmoid(backbone(x) . H^T), rows = examples,
// columns = seen classes.
Mat predict(const Mat& adj_norm, const Mat& h0, const Mat& features, const ModelParams& p);

// Differentiable forward; leaves expose the trainable tensors and the
// graph representation feeds the relationship-preserving loss.
struct PredictGraph {
  NodePtr v1, v2, w1, w2;  // leaves in ModelParams::tensors() order (v1, v2, w1, w2)
  NodePtr graph_repr;      // H, seen x D
  NodePtr scores;          // batch x seen, sigmoid applied
  std::vector<NodePtr> leaves() const { return {v1, v2, w1, w2}; }
};
PredictGraph predict_graph(const Mat& adj_norm, const Mat& h0, const Mat& features,
                           const ModelParams& p);

}  // namespace lml
