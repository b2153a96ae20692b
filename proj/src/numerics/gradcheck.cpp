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

#include "biogen/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "biogen/numerics/random.hpp"

namespace biogen::numerics {

GradCheckResult grad_check(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                           const GradCheckOptions& options) {
  if (!(options.h > 0)) throw std::invalid_argument("grad_check: h must be positive");
  for (auto& p : params) p.zero_grad();
  Tensor loss = loss_fn();
  backward(loss);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad());

  Rng rng(options.seed);
  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    const Index n = p.numel();
    std::vector<Index> coords(static_cast<std::size_t>(n));
    std::iota(coords.begin(), coords.end(), Index{0});
    if (n > options.coords_per_param) {
      // Partial Fisher-Yates for a without-replacement sample.
      for (Index i = 0; i < options.coords_per_param; ++i) {
        const Index j = i + static_cast<Index>(rng.index(static_cast<std::uint64_t>(n - i)));
        std::swap(coords[static_cast<std::size_t>(i)], coords[static_cast<std::size_t>(j)]);
      }
      coords.resize(static_cast<std::size_t>(options.coords_per_param));
    }
    for (Index c : coords) {
      double& slot = p.mutable_value().data()[c];
      const double original = slot;
      slot = original + options.h;
      const double plus = loss_fn().item();
      slot = original - options.h;
      const double minus = loss_fn().item();
      slot = original;
      const double numeric = (plus - minus) / (2.0 * options.h);
      const double a = analytic[pi].data()[c];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.magnitude_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coordinates_checked;
      if (rel > result.max_relative_error || result.worst_param < 0) {
        result.max_relative_error = std::max(rel, result.max_relative_error);
        if (rel >= result.max_relative_error) {
          result.worst_param = static_cast<Index>(pi);
          result.worst_coordinate = c;
          result.worst_analytic = a;
          result.worst_numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace biogen::numerics
