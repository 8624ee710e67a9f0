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

#include "xprop/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "xprop/numeric.h"

namespace xprop {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    auto item = trim(std::string_view(text).substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

ConfigError bad_value(const std::string& key, const std::string& value,
                      std::string_view expected) {
  return ConfigError("config key '" + key + "': expected " + std::string(expected) +
                     ", got '" + value + "'");
}

}  // namespace

Config Config::parse(std::string_view ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  Config config;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      config.values_[name] = trim(node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      config.values_[name + "." + key] = trim(leaf.data());
    }
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

void Config::set(const std::string& key, std::string value) {
  if (key.empty()) throw ConfigError("empty config key");
  values_[key] = trim(value);
}

std::string Config::get_string(const std::string& key,
                               std::optional<std::string> fallback) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  if (fallback) return *fallback;
  throw ConfigError("missing config key '" + key + "'");
}

double Config::get_double(const std::string& key, std::optional<double> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError("missing config key '" + key + "'");
  }
  double v = 0;
  if (!parse_double(it->second, v)) throw bad_value(key, it->second, "a number");
  return v;
}

std::uint64_t Config::get_uint(const std::string& key,
                               std::optional<std::uint64_t> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError("missing config key '" + key + "'");
  }
  std::uint64_t v = 0;
  if (!parse_uint(it->second, v)) throw bad_value(key, it->second, "a non-negative integer");
  return v;
}

bool Config::get_bool(const std::string& key, std::optional<bool> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError("missing config key '" + key + "'");
  }
  const auto& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw bad_value(key, v, "a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        std::optional<std::vector<double>> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError("missing config key '" + key + "'");
  }
  std::vector<double> out;
  for (const auto& item : split_list(it->second)) {
    double v = 0;
    if (!parse_double(item, v)) throw bad_value(key, it->second, "a list of numbers");
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> Config::get_uints(
    const std::string& key, std::optional<std::vector<std::uint64_t>> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw ConfigError("missing config key '" + key + "'");
  }
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(it->second)) {
    std::uint64_t v = 0;
    if (!parse_uint(item, v)) throw bad_value(key, it->second, "a list of integers");
    out.push_back(v);
  }
  return out;
}

std::map<std::string, std::string> Config::section(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  const std::string p = prefix + ".";
  for (auto it = values_.lower_bound(p); it != values_.end(); ++it) {
    if (it->first.compare(0, p.size(), p) != 0) break;
    out[it->first.substr(p.size())] = it->second;
  }
  return out;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t Config::hash() const { return fnv1a64(canonical()); }

}  // namespace xprop
