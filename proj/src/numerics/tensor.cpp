// Copyright 2026 The Biogen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biogen/numerics/tensor.hpp"

#include <sstream>
#include <unordered_set>

namespace biogen::numerics {
namespace {

thread_local bool g_grad_enabled = true;

Index shape_product(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape));
    n *= d;
  }
  return n;
}

}  // namespace

void Node::accumulate(const Matrix& delta) {
  if (grad.size() == 0) {
    grad = delta;
  } else {
    grad += delta;
  }
}

Shape matrix_shape(Index rows, Index cols) { return Shape{rows, cols}; }

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  if (value.rows() <= 0 || value.cols() <= 0) {
    throw ShapeError("tensor must be non-empty");
  }
  node_->shape = matrix_shape(value.rows(), value.cols());
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::span<const double> data, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  const Index n = shape_product(shape);
  if (n != static_cast<Index>(data.size())) {
    throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                     shape_string(shape));
  }
  Index rows = 1;
  Index cols = n;
  if (shape.size() >= 2) {
    cols = shape.back();
    rows = n / cols;
  }
  node_->value = Eigen::Map<const Matrix>(data.data(), rows, cols);
  node_->shape = std::move(shape);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  const double data[1] = {v};
  return Tensor(Shape{}, data, requires_grad);
}

Tensor Tensor::vector(std::span<const double> data, bool requires_grad) {
  return Tensor(Shape{static_cast<Index>(data.size())}, data, requires_grad);
}

Tensor Tensor::zeros(Index rows, Index cols, bool requires_grad) {
  return Tensor(Matrix::Zero(rows, cols), requires_grad);
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() requires a single-element tensor");
  return node_->value(0, 0);
}

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

Tensor Tensor::clone() const {
  auto node = std::make_shared<Node>();
  node->value = node_->value;
  node->shape = node_->shape;
  node->requires_grad = node_->requires_grad;
  return from_node(std::move(node));
}

Tensor Tensor::from_node(std::shared_ptr<Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor make_result(Matrix value, Shape shape, std::vector<Tensor> inputs,
                   std::function<void(const Matrix&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->shape = std::move(shape);
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor::from_node(std::move(node));
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw std::invalid_argument("backward on undefined tensor");
  if (loss.numel() != 1) {
    throw ShapeError("backward requires a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS for a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward_fn) n->grad.resize(0, 0);
  }
  if (loss.node()->backward_fn) {
    loss.node()->grad = Matrix::Ones(1, 1);
  } else {
    loss.node()->accumulate(Matrix::Ones(1, 1));
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->backward_fn || n->grad.size() == 0) continue;
    n->backward_fn(n->grad);
  }
  for (Node* n : order) {
    if (n->backward_fn) n->grad.resize(0, 0);
  }
}

Tensor detach(const Tensor& t) {
  auto node = std::make_shared<Node>();
  node->value = t.value();
  node->shape = t.shape();
  node->requires_grad = false;
  return Tensor::from_node(std::move(node));
}

}  // namespace biogen::numerics
