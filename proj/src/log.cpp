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

#include "biogen/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace biogen::log {
namespace {

std::mutex g_mutex;
Level g_level = Level::kInfo;
std::function<void(Level, std::string_view)> g_sink;
std::atomic<std::size_t> g_warnings{0};

const char* tag(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarning: return "warning";
    case Level::kError: return "error";
    default: return "";
  }
}

}  // namespace

void set_level(Level level) {
  std::lock_guard lock(g_mutex);
  g_level = level;
}

Level level() {
  std::lock_guard lock(g_mutex);
  return g_level;
}

void set_sink(std::function<void(Level, std::string_view)> sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void write(Level level, std::string_view message) {
  if (level == Level::kWarning) ++g_warnings;
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(level, message);
    return;
  }
  if (level < g_level) return;
  std::cerr << "[" << tag(level) << "] " << message << '\n';
}

std::size_t warning_count() { return g_warnings.load(); }

}  // namespace biogen::log
