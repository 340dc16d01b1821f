#include "lml/model.hpp"

#include <cmath>
#include <set>

#include "lml/errors.hpp"
#include "lml/rng.hpp"

namespace lml {

ClassEmbeddings::ClassEmbeddings(int dim, uint64_t seed) : rows_(0, dim), dim_(dim), seed_(seed) {
  if (dim < 1) throw ConfigError("ClassEmbeddings: dim must be >= 1");
}

void ClassEmbeddings::grow(const std::vector<std::string>& new_names) {
  std::set<std::string> seen(names_.begin(), names_.end());
  for (const auto& n : new_names) {
    if (!seen.insert(n).second) {
      throw ConfigError("ClassEmbeddings: duplicate class name '" + n + "'");
    }
  }
  const int old_count = count();
  Mat grown(old_count + static_cast<int>(new_names.size()), dim_);
  grown.topRows(old_count) = rows_;
  for (size_t k = 0; k < new_names.size(); ++k) {
    const int global_index = old_count + static_cast<int>(k);
    Rng rng(mix_seed(seed_, 0x656d6264ull + static_cast<uint64_t>(global_index)));
    Vec row(dim_);
    for (int i = 0; i < dim_; ++i) row(i) = rng.gaussian();
    row /= row.norm();
    grown.row(global_index) = row.transpose();
  }
  rows_ = std::move(grown);
  names_.insert(names_.end(), new_names.begin(), new_names.end());
}

namespace {

Mat gaussian_init(int rows, int cols, uint64_t seed) {
  // Scale 1/sqrt(fan_in) keeps activations near unit variance at the start.
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.gaussian();
  }
  return m;
}

}  // namespace

ModelParams ModelParams::init(const ModelDims& dims, uint64_t seed) {
  if (dims.feature_dim < 1 || dims.backbone_hidden < 1 || dims.embed_dim < 1 ||
      dims.gcn_hidden < 1 || dims.repr_dim < 1) {
    throw ConfigError("ModelParams: all dimensions must be >= 1");
  }
  ModelParams p;
  p.backbone.v1 = gaussian_init(dims.feature_dim, dims.backbone_hidden, mix_seed(seed, 1));
  p.backbone.v2 = gaussian_init(dims.backbone_hidden, dims.repr_dim, mix_seed(seed, 2));
  p.gcn.w1 = gaussian_init(dims.embed_dim, dims.gcn_hidden, mix_seed(seed, 3));
  p.gcn.w2 = gaussian_init(dims.gcn_hidden, dims.repr_dim, mix_seed(seed, 4));
  return p;
}

std::vector<Mat*> ModelParams::tensors() {
  return {&backbone.v1, &backbone.v2, &gcn.w1, &gcn.w2};
}

std::vector<const Mat*> ModelParams::tensors() const {
  return {&backbone.v1, &backbone.v2, &gcn.w1, &gcn.w2};
}

const std::vector<std::string>& ModelParams::tensor_names() {
  static const std::vector<std::string> names = {"v1", "v2", "w1", "w2"};
  return names;
}

uint64_t ModelParams::checksum() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const Mat* t : tensors()) h = lml::checksum(*t, h);
  return h;
}

namespace {

Mat leaky(const Mat& x, double slope) {
  return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

void check_gcn_shapes(const Mat& adj, const Mat& h0, const GcnParams& p) {
  if (adj.rows() != adj.cols()) {
    throw ShapeError("gcn_forward: adjacency must be square, got " + shape_str(adj));
  }
  if (adj.cols() != h0.rows()) {
    throw ShapeError("gcn_forward: adjacency " + shape_str(adj) + " vs embeddings " +
                     shape_str(h0));
  }
  if (h0.cols() != p.w1.rows()) {
    throw ShapeError("gcn_forward: embeddings " + shape_str(h0) + " vs w1 " +
                     shape_str(p.w1));
  }
  if (p.w1.cols() != p.w2.rows()) {
    throw ShapeError("gcn_forward: w1 " + shape_str(p.w1) + " vs w2 " + shape_str(p.w2));
  }
}

}  // namespace

Mat gcn_forward(const Mat& adj_norm, const Mat& h0, const GcnParams& p) {
  check_gcn_shapes(adj_norm, h0, p);
  // Association kept identical to the differentiable path so the two
  // routes agree to the last bit.
  const Mat h1 = leaky(adj_norm * (h0 * p.w1), p.leaky_slope);
  return (adj_norm * h1) * p.w2;
}

Mat backbone_forward(const Mat& features, const BackboneParams& p) {
  if (features.cols() != p.v1.rows()) {
    throw ShapeError("backbone_forward: input " + shape_str(features) + " vs v1 " +
                     shape_str(p.v1));
  }
  return leaky(features * p.v1, p.leaky_slope) * p.v2;
}

Mat predict(const Mat& adj_norm, const Mat& h0, const Mat& features, const ModelParams& p) {
  const Mat h = gcn_forward(adj_norm, h0, p.gcn);
  const Mat f = backbone_forward(features, p.backbone);
  const Mat ht = h.transpose();
  const Mat logits = f * ht;
  return logits.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

PredictGraph predict_graph(const Mat& adj_norm, const Mat& h0, const Mat& features,
                           const ModelParams& p) {
  check_gcn_shapes(adj_norm, h0, p.gcn);
  if (features.cols() != p.backbone.v1.rows()) {
    throw ShapeError("predict_graph: input " + shape_str(features) + " vs v1 " +
                     shape_str(p.backbone.v1));
  }
  PredictGraph g;
  g.v1 = make_leaf(p.backbone.v1);
  g.v2 = make_leaf(p.backbone.v2);
  g.w1 = make_leaf(p.gcn.w1);
  g.w2 = make_leaf(p.gcn.w2);

  auto adj = make_constant(adj_norm);
  auto h1 = leaky_relu(matmul(adj, matmul(make_constant(h0), g.w1)), p.gcn.leaky_slope);
  g.graph_repr = matmul(matmul(adj, h1), g.w2);

  auto hid = leaky_relu(matmul(make_constant(features), g.v1), p.backbone.leaky_slope);
  auto feat = matmul(hid, g.v2);

  g.scores = sigmoid(matmul(feat, transpose(g.graph_repr)));
  return g;
}

}  // namespace lml
