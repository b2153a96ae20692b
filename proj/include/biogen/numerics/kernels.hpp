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

// Scalar-generic dense kernels shared by the autograd ops, the optimizer and
// the decoding code. Everything here is a pure function of its Eigen inputs.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "biogen/numerics/tensor.hpp"

namespace biogen::numerics {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

// Row-wise softmax of x / temperature. Throws on NaN input or a non-positive
// temperature. Entries equal to -inf receive zero probability.
template <typename Derived>
RowMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& x,
                                                 typename Derived::Scalar temperature = 1) {
  using Scalar = typename Derived::Scalar;
  if (!(temperature > Scalar(0))) throw std::invalid_argument("softmax temperature must be > 0");
  if (x.hasNaN()) throw std::invalid_argument("softmax input contains NaN");
  RowMatrix<Scalar> out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar m = x.row(r).maxCoeff();
    if (!std::isfinite(static_cast<double>(m))) {
      throw std::invalid_argument("softmax row has no finite entry");
    }
    out.row(r) = ((x.row(r).array() - m) / temperature).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Derived>
RowMatrix<typename Derived::Scalar> log_softmax_rows(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  RowMatrix<Scalar> out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar m = x.row(r).maxCoeff();
    const Scalar lse = m + std::log((x.row(r).array() - m).exp().sum());
    out.row(r) = (x.row(r).array() - lse).matrix();
  }
  return out;
}

// tanh approximation of GELU and its derivative.
template <typename Scalar>
Scalar gelu(Scalar x) {
  constexpr Scalar k = Scalar(0.7978845608028654);  // sqrt(2/pi)
  const Scalar inner = k * (x + Scalar(0.044715) * x * x * x);
  return Scalar(0.5) * x * (Scalar(1) + std::tanh(inner));
}

template <typename Scalar>
Scalar gelu_derivative(Scalar x) {
  constexpr Scalar k = Scalar(0.7978845608028654);
  const Scalar inner = k * (x + Scalar(0.044715) * x * x * x);
  const Scalar t = std::tanh(inner);
  const Scalar dinner = k * (Scalar(1) + Scalar(3) * Scalar(0.044715) * x * x);
  return Scalar(0.5) * (Scalar(1) + t) + Scalar(0.5) * x * (Scalar(1) - t * t) * dinner;
}

// Label-smoothed negative log-likelihood of one row of log-probabilities:
// the target keeps 1 - eps of the mass and the remaining V - 1 classes share
// eps uniformly.
template <typename Derived>
typename Derived::Scalar smoothed_nll_row(const Eigen::MatrixBase<Derived>& log_probs, Index target,
                                          typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  const Index vocab = log_probs.size();
  const Scalar nll = -log_probs(target);
  if (eps == Scalar(0) || vocab < 2) return nll;
  const Scalar others = -(log_probs.sum() - log_probs(target));
  return (Scalar(1) - eps) * nll + eps / Scalar(vocab - 1) * others;
}

}  // namespace biogen::numerics
