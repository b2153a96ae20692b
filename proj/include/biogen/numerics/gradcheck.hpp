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

#include <cstdint>
#include <functional>
#include <span>

#include "biogen/numerics/tensor.hpp"

namespace biogen::numerics {

struct GradCheckOptions {
  double h = 1e-5;
  // Coordinates sampled per parameter tensor; tensors with fewer entries are
  // checked exhaustively.
  Index coords_per_param = 6;
  // Denominator floor: errors on gradients smaller than this are measured
  // relative to the floor instead.
  double magnitude_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  Index coordinates_checked = 0;
  Index worst_param = -1;
  Index worst_coordinate = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares analytic gradients of `loss_fn` against central differences.
// `loss_fn` must be deterministic; that is the caller's responsibility.
GradCheckResult grad_check(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                           const GradCheckOptions& options = {});

}  // namespace biogen::numerics
