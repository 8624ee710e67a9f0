// Copyright 2026 The xprop-lab Authors.
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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xprop {

// Bad or missing configuration; the CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sectioned key-value configuration addressed as "section.key". Keys outside
// any section are addressed by their bare name.
//
//   [data]
//   m = 100
//   dim = 2
//   [train]
//   lr_grid = 0.01, 0.05
class Config {
 public:
  static Config parse(std::string_view ini_text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const;
  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  std::uint64_t get_uint(const std::string& key,
                         std::optional<std::uint64_t> fallback = std::nullopt) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  // Comma separated.
  std::vector<double> get_doubles(const std::string& key,
                                  std::optional<std::vector<double>> fallback = std::nullopt) const;
  std::vector<std::uint64_t> get_uints(
      const std::string& key,
      std::optional<std::vector<std::uint64_t>> fallback = std::nullopt) const;

  // Entries below "prefix." with the prefix stripped.
  std::map<std::string, std::string> section(const std::string& prefix) const;

  // Sorted "key = value" lines; the hash is taken over this text.
  std::string canonical() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace xprop
