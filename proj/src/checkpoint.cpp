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

#include "biogen/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace biogen::checkpoint {
namespace {

using nlohmann::ordered_json;

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    std::reverse(p, p + sizeof(T));
  }
  out.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      auto* p = reinterpret_cast<unsigned char*>(&value);
      std::reverse(p, p + sizeof(T));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_record(std::string& out, const std::string& name, const Matrix& value) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put<std::uint8_t>(out, kFloat64);
  put<std::uint32_t>(out, 2);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(value.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(value.cols()));
  for (Index i = 0; i < value.size(); ++i) put<double>(out, value.data()[i]);
}

}  // namespace

std::string serialize(Model& model, const ordered_json& train_config, const numerics::AdamState* optimizer) {
  const auto params = model.parameters();
  if (optimizer && !optimizer->first_moment.empty() &&
      (optimizer->first_moment.size() != params.size() || optimizer->second_moment.size() != params.size())) {
    throw CheckpointError("optimizer state does not match the model parameters");
  }
  ordered_json header;
  header["format"] = "biogen-checkpoint";
  header["model"] = ordered_json::parse(to_json(model.config).dump());
  header["train"] = train_config;
  header["vocab"] = model.vocab.tokens();
  header["casing"] = model.vocab.casing();
  header["optimizer_step"] = optimizer ? optimizer->step : 0;
  const std::string json = header.dump();

  std::string out(kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, json.size());
  out += json;
  const bool moments = optimizer && !optimizer->first_moment.empty();
  put<std::uint64_t>(out, params.size() * (moments ? 3 : 1));
  for (const auto& p : params) put_record(out, p.name, p.tensor.value());
  if (moments) {
    for (std::size_t i = 0; i < params.size(); ++i) put_record(out, "optim.m." + params[i].name, optimizer->first_moment[i]);
    for (std::size_t i = 0; i < params.size(); ++i) put_record(out, "optim.v." + params[i].name, optimizer->second_moment[i]);
  }
  return out;
}

Checkpoint deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) throw CheckpointError("not a checkpoint (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto json_len = in.get<std::uint64_t>();
  ordered_json header;
  try {
    header = ordered_json::parse(in.take(json_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }

  Checkpoint ck;
  try {
    auto vocab = text::Vocabulary::from_tokens(header.at("vocab").get<std::vector<std::string>>());
    vocab.set_casing(header.at("casing").get<std::map<std::string, std::string>>());
    const auto config = model_config_from_json(nlohmann::json::parse(header.at("model").dump()));
    ck.model = Model::create(config, std::move(vocab), 0);
    ck.train_config = header.at("train");
    ck.optimizer.step = header.at("optimizer_step").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }

  std::map<std::string, Matrix> records;
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::string name(in.take(in.get<std::uint32_t>()));
    if (in.get<std::uint8_t>() != kFloat64) throw CheckpointError("record " + name + ": unsupported dtype");
    const auto rank = in.get<std::uint32_t>();
    if (rank != 2) throw CheckpointError("record " + name + ": expected rank 2");
    const auto rows = static_cast<Index>(in.get<std::uint64_t>());
    const auto cols = static_cast<Index>(in.get<std::uint64_t>());
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = in.get<double>();
    if (!records.emplace(name, std::move(m)).second) throw CheckpointError("duplicate record " + name);
  }
  if (!in.done()) throw CheckpointError("trailing bytes after checkpoint records");

  auto params = ck.model.parameters();
  std::size_t used = 0;
  for (auto& p : params) {
    auto it = records.find(p.name);
    if (it == records.end()) throw CheckpointError("checkpoint is missing parameter " + p.name);
    if (it->second.rows() != p.tensor.rows() || it->second.cols() != p.tensor.cols()) {
      throw CheckpointError("shape mismatch for parameter " + p.name);
    }
    p.tensor.mutable_value() = it->second;
    ++used;
  }
  if (records.count("optim.m." + params.front().name)) {
    for (auto& p : params) {
      auto m = records.find("optim.m." + p.name);
      auto v = records.find("optim.v." + p.name);
      if (m == records.end() || v == records.end()) throw CheckpointError("incomplete optimizer state for " + p.name);
      ck.optimizer.first_moment.push_back(m->second);
      ck.optimizer.second_moment.push_back(v->second);
      used += 2;
    }
  }
  if (used != records.size()) throw CheckpointError("checkpoint has records the model does not use");
  return ck;
}

void save(const std::filesystem::path& path, Model& model, const ordered_json& train_config,
          const numerics::AdamState* optimizer) {
  const std::string bytes = serialize(model, train_config, optimizer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint: " + path.string());
}

Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace biogen::checkpoint
