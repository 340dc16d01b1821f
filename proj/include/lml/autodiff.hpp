#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "lml/matrix.hpp"

namespace lml {

// Define-by-run reverse-mode differentiation over dense matrices. Every
// forward pass builds a fresh graph; backward() walks it exactly once in
// reverse topological order and accumulates into Node::grad, so shared
// subexpressions add up instead of overwriting.
//
// Nodes are confined to the thread that built them. Matrix values may be
// shared read-only.
class Node;
using NodePtr = std::shared_ptr<Node>;

class Node {
 public:
  Mat value;
  Mat grad;  // same shape as value; zero until backward() reaches this node
  std::vector<NodePtr> parents;
  std::function<void(const Node&)> backprop;  // pulls this->grad into parents

  explicit Node(Mat v) : value(std::move(v)), grad(Mat::Zero(value.rows(), value.cols())) {}
};

// Leaf wrapping an input matrix. Trainable leaves have their grad read back
// after backward(); constants simply never get read.
NodePtr make_leaf(Mat v);
inline NodePtr make_constant(Mat v) { return make_leaf(std::move(v)); }

// Matrix product; backward is dL/da = g b^T, dL/db = a^T g.
NodePtr matmul(const NodePtr& a, const NodePtr& b);

// Elementwise binary ops (shapes must match exactly; no broadcasting).
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);

// Elementwise unary ops.
NodePtr sigmoid(const NodePtr& a);
NodePtr leaky_relu(const NodePtr& a, double slope);
NodePtr log_elem(const NodePtr& a);  // throws std::domain_error on input <= 0
NodePtr square(const NodePtr& a);
NodePtr scalar_mul(const NodePtr& a, double s);

// Pass-through inside [lo, hi], gradient zeroed where the value was clamped.
NodePtr clamp(const NodePtr& a, double lo, double hi);

// Structural ops.
NodePtr transpose(const NodePtr& a);
NodePtr slice_rows(const NodePtr& a, int begin, int count);
NodePtr slice_cols(const NodePtr& a, int begin, int count);

// Reduction to a 1x1 node.
NodePtr sum(const NodePtr& a);

// Seeds root->grad with 1 (root must be 1x1) and propagates through the
// graph, visiting each node exactly once.
void backward(const NodePtr& root);

}  // namespace lml
