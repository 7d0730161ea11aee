// Copyright 2026 The cfsnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Strict readers for JSON configuration objects. Every object is checked
// against its allowed keys so a misspelt option fails loudly, and type
// mismatches name the full dotted path.

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "cfsnn/core/error.hpp"

namespace cfsnn::config {

using json = nlohmann::json;

inline std::string join(std::string_view path, std::string_view key) {
  if (path.empty()) return std::string(key);
  return std::string(path) + "." + std::string(key);
}

inline void require_object(const json& j, std::string_view path) {
  if (!j.is_object())
    throw ConfigError(std::string(path.empty() ? "<root>" : path) +
                      ": expected an object");
}

inline void check_keys(const json& j, std::string_view path,
                       std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key) + ": unknown key");
  }
}

template <class T>
T get(const json& j, std::string_view path, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>)
        if (it->template get<long long>() < 0) throw ConfigError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError("");
    }
    return it->template get<T>();
  } catch (const std::exception&) {
    const char* want = std::is_same_v<T, bool>            ? "a boolean"
                       : std::is_integral_v<T>            ? (std::is_unsigned_v<T> ? "a non-negative integer" : "an integer")
                       : std::is_floating_point_v<T>      ? "a number"
                                                          : "a string";
    throw ConfigError(join(path, key) + ": expected " + want + ", got " +
                      it->dump());
  }
}

}  // namespace cfsnn::config
