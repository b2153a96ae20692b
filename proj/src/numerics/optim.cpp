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

#include "biogen/numerics/optim.hpp"

#include <algorithm>
#include <stdexcept>

namespace biogen::numerics {
namespace {

void ensure_moments(std::span<Tensor> params, AdamState& state) {
  if (state.first_moment.empty() && state.second_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
      state.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw ShapeError("adam: optimizer state does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& m = state.first_moment[i];
    const auto& v = state.second_moment[i];
    if (m.rows() != params[i].rows() || m.cols() != params[i].cols() || v.rows() != m.rows() ||
        v.cols() != m.cols()) {
      throw ShapeError("adam: moment shape mismatch for parameter " + std::to_string(i));
    }
  }
}

}  // namespace

void adam_update(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state,
                 const AdamOptions& options) {
  if (!(options.lr > 0)) throw std::invalid_argument("adam: lr must be positive");
  if (grads.size() != params.size()) throw ShapeError("adam: gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols()) {
      throw ShapeError("adam: gradient shape mismatch for parameter " + std::to_string(i));
    }
  }
  ensure_moments(params, state);
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_step(params[i].mutable_value(), grads[i], state.first_moment[i], state.second_moment[i], state.step,
              options);
  }
}

void adam_update(std::span<Tensor> params, AdamState& state, const AdamOptions& options) {
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (const auto& p : params) grads.push_back(p.grad());
  adam_update(params, grads, state, options);
}

double PolynomialDecaySchedule::at(std::int64_t update) const {
  if (warmup_updates > 0 && update <= warmup_updates) {
    return peak_lr * static_cast<double>(std::max<std::int64_t>(update, 0)) / static_cast<double>(warmup_updates);
  }
  if (update >= total_updates) return end_lr;
  const double span = static_cast<double>(total_updates - warmup_updates);
  const double remaining = 1.0 - static_cast<double>(update - warmup_updates) / span;
  return (peak_lr - end_lr) * std::pow(remaining, power) + end_lr;
}

}  // namespace biogen::numerics
