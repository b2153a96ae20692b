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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace biogen {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = RowMatrix<double>;
using Shape = std::vector<Index>;

namespace numerics {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One vertex of the dynamically recorded computation graph. `backward_fn`
// receives the gradient of the loss w.r.t. this node's value and accumulates
// into the nodes it captured.
struct Node {
  Matrix value;
  Matrix grad;
  Shape shape;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(const Matrix&)> backward_fn;

  void accumulate(const Matrix& delta);
  template <typename Expr>
  void accumulate_expr(const Expr& delta) {
    if (grad.size() == 0) {
      grad = delta;
    } else {
      grad += delta;
    }
  }
};

// Handle to a graph node. Copies share the node; use `clone()` for a deep copy.
//
// Values are stored as a row-major matrix. Rank-0 and rank-1 tensors occupy a
// single row; every rank-2 tensor maps onto rows x cols directly.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);
  Tensor(Shape shape, std::span<const double> data, bool requires_grad = false);

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor vector(std::span<const double> data, bool requires_grad = false);
  static Tensor zeros(Index rows, Index cols, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  // Parameter updates only; activations are treated as immutable.
  Matrix& mutable_value() { return node_->value; }

  const Shape& shape() const { return node_->shape; }
  Index rank() const { return static_cast<Index>(node_->shape.size()); }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index numel() const { return node_->value.size(); }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_->grad.size() != 0; }
  // Zero-filled matrix when no gradient has been accumulated.
  Matrix grad() const;
  void zero_grad() { node_->grad.resize(0, 0); }

  Tensor clone() const;
  const std::shared_ptr<Node>& node() const { return node_; }

  // Used by op implementations.
  static Tensor from_node(std::shared_ptr<Node> node);

 private:
  std::shared_ptr<Node> node_;
};

// Graph recording is on by default; a guard disables it for the current thread.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Builds a result node. When grad mode is off or no input requires grad the
// backward closure is dropped and the result is a constant leaf.
Tensor make_result(Matrix value, Shape shape, std::vector<Tensor> inputs,
                   std::function<void(const Matrix&)> backward_fn);

// Reverse-mode sweep from a single-element loss. Leaf gradients accumulate
// across calls; interior gradients are released afterwards.
void backward(const Tensor& loss);

// Constant view of `t`: same values, no gradient path.
Tensor detach(const Tensor& t);

Shape matrix_shape(Index rows, Index cols);
std::string shape_string(const Shape& shape);

}  // namespace numerics
}  // namespace biogen
