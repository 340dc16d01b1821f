#include "lml/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace lml {

NodePtr make_leaf(Mat v) {
  require_finite(v, "leaf");
  return std::make_shared<Node>(std::move(v));
}

namespace {

NodePtr make_op(Mat value, std::vector<NodePtr> parents,
                std::function<void(const Node&)> backprop, const char* op) {
  require_finite(value, op);
  auto out = std::make_shared<Node>(std::move(value));
  out->parents = std::move(parents);
  out->backprop = std::move(backprop);
  return out;
}

}  // namespace

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  if (a->value.cols() != b->value.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_str(a->value) + " vs " +
                     shape_str(b->value));
  }
  return make_op(
      a->value * b->value, {a, b},
      [a, b](const Node& o) {
        a->grad.noalias() += o.grad * b->value.transpose();
        b->grad.noalias() += a->value.transpose() * o.grad;
      },
      "matmul");
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a->value, b->value, "add");
  return make_op(
      a->value + b->value, {a, b},
      [a, b](const Node& o) {
        a->grad += o.grad;
        b->grad += o.grad;
      },
      "add");
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a->value, b->value, "sub");
  return make_op(
      a->value - b->value, {a, b},
      [a, b](const Node& o) {
        a->grad += o.grad;
        b->grad -= o.grad;
      },
      "sub");
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  require_same_shape(a->value, b->value, "mul");
  return make_op(
      a->value.cwiseProduct(b->value), {a, b},
      [a, b](const Node& o) {
        a->grad += o.grad.cwiseProduct(b->value);
        b->grad += o.grad.cwiseProduct(a->value);
      },
      "mul");
}

NodePtr sigmoid(const NodePtr& a) {
  Mat s = a->value.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return make_op(
      std::move(s), {a},
      [a](const Node& o) {
        a->grad += o.grad.cwiseProduct(
            o.value.cwiseProduct(Mat::Ones(o.value.rows(), o.value.cols()) - o.value));
      },
      "sigmoid");
}

NodePtr leaky_relu(const NodePtr& a, double slope) {
  Mat v = a->value.unaryExpr([slope](double x) { return x >= 0.0 ? x : slope * x; });
  return make_op(
      std::move(v), {a},
      [a, slope](const Node& o) {
        a->grad += o.grad.cwiseProduct(
            a->value.unaryExpr([slope](double x) { return x >= 0.0 ? 1.0 : slope; }));
      },
      "leaky_relu");
}

NodePtr log_elem(const NodePtr& a) {
  if ((a->value.array() <= 0.0).any()) {
    throw std::domain_error("log: non-positive input (clamp probabilities first)");
  }
  return make_op(
      a->value.array().log().matrix(), {a},
      [a](const Node& o) { a->grad += o.grad.cwiseQuotient(a->value); }, "log");
}

NodePtr square(const NodePtr& a) {
  return make_op(
      a->value.cwiseProduct(a->value), {a},
      [a](const Node& o) { a->grad += 2.0 * o.grad.cwiseProduct(a->value); }, "square");
}

NodePtr scalar_mul(const NodePtr& a, double s) {
  return make_op(
      s * a->value, {a}, [a, s](const Node& o) { a->grad += s * o.grad; }, "scalar_mul");
}

NodePtr clamp(const NodePtr& a, double lo, double hi) {
  Mat v = a->value.cwiseMax(lo).cwiseMin(hi);
  return make_op(
      std::move(v), {a},
      [a, lo, hi](const Node& o) {
        a->grad += o.grad.cwiseProduct(a->value.unaryExpr(
            [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; }));
      },
      "clamp");
}

NodePtr transpose(const NodePtr& a) {
  return make_op(
      a->value.transpose(), {a},
      [a](const Node& o) { a->grad += o.grad.transpose(); }, "transpose");
}

NodePtr slice_rows(const NodePtr& a, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > a->value.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of " + shape_str(a->value));
  }
  return make_op(
      a->value.middleRows(begin, count), {a},
      [a, begin, count](const Node& o) { a->grad.middleRows(begin, count) += o.grad; },
      "slice_rows");
}

NodePtr slice_cols(const NodePtr& a, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > a->value.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of " + shape_str(a->value));
  }
  return make_op(
      a->value.middleCols(begin, count), {a},
      [a, begin, count](const Node& o) { a->grad.middleCols(begin, count) += o.grad; },
      "slice_cols");
}

NodePtr sum(const NodePtr& a) {
  Mat v(1, 1);
  v(0, 0) = a->value.sum();
  return make_op(
      std::move(v), {a}, [a](const Node& o) { a->grad.array() += o.grad(0, 0); }, "sum");
}

void backward(const NodePtr& root) {
  if (root->value.rows() != 1 || root->value.cols() != 1) {
    throw ShapeError("backward: root must be 1x1, got " + shape_str(root->value));
  }
  // Iterative DFS; reverse post-order is a topological order of the graph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop(**it);
  }
}

}  // namespace lml
