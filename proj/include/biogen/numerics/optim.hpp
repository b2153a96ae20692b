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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "biogen/numerics/tensor.hpp"

namespace biogen::numerics {

struct AdamOptions {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

// One bias-corrected Adam step with decoupled weight decay applied to a single
// parameter block. `step` is the 1-based step count after incrementing.
template <typename ParamDerived, typename GradDerived, typename MomentDerived>
void adam_step(Eigen::MatrixBase<ParamDerived>& param, const Eigen::MatrixBase<GradDerived>& grad,
               Eigen::MatrixBase<MomentDerived>& m, Eigen::MatrixBase<MomentDerived>& v, std::int64_t step,
               const AdamOptions& opt) {
  using Scalar = typename ParamDerived::Scalar;
  m = opt.beta1 * m + (Scalar(1) - opt.beta1) * grad;
  v = opt.beta2 * v + (Scalar(1) - opt.beta2) * grad.cwiseProduct(grad);
  const Scalar bc1 = Scalar(1) - std::pow(opt.beta1, static_cast<Scalar>(step));
  const Scalar bc2 = Scalar(1) - std::pow(opt.beta2, static_cast<Scalar>(step));
  if (opt.weight_decay != 0) param *= (Scalar(1) - opt.lr * opt.weight_decay);
  param -= (opt.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + opt.eps)).matrix();
}

// Updates `params` in place from explicit gradients. Moments are created on
// the first call; shape mismatches throw.
void adam_update(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state,
                 const AdamOptions& options);

// Same, reading each parameter's accumulated gradient (absent = zero).
void adam_update(std::span<Tensor> params, AdamState& state, const AdamOptions& options);

// Linear warmup to `peak_lr` over `warmup_updates`, then polynomial decay to
// `end_lr` at `total_updates`. Updates are numbered from 1.
struct PolynomialDecaySchedule {
  double peak_lr = 3e-5;
  double end_lr = 0.0;
  double power = 1.0;
  std::int64_t warmup_updates = 500;
  std::int64_t total_updates = 50000;

  double at(std::int64_t update) const;
};

}  // namespace biogen::numerics
