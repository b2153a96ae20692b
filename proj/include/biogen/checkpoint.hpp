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
#include <filesystem>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <string_view>

#include "biogen/model.hpp"
#include "biogen/numerics/optim.hpp"

namespace biogen::checkpoint {

// Layout (all integers little-endian):
//   "BIOGCKPT" | u32 version | u64 json_len | json | u64 records |
//   records of: u32 name_len | name | u8 dtype | u32 rank | u64 dims[rank] | f64 payload
// The JSON holds the model config, the training config, the vocabulary
// (tokens and casing) and the optimizer step. Optimizer moments are stored
// as records named "optim.m.<param>" and "optim.v.<param>".
inline constexpr std::string_view kMagic = "BIOGCKPT";
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint8_t kFloat64 = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  Model model;
  nlohmann::ordered_json train_config;  // null when absent
  numerics::AdamState optimizer;        // empty moments when absent
};

std::string serialize(Model& model, const nlohmann::ordered_json& train_config = nullptr,
                      const numerics::AdamState* optimizer = nullptr);
Checkpoint deserialize(std::string_view bytes);

void save(const std::filesystem::path& path, Model& model, const nlohmann::ordered_json& train_config = nullptr,
          const numerics::AdamState* optimizer = nullptr);
Checkpoint load(const std::filesystem::path& path);

}  // namespace biogen::checkpoint
