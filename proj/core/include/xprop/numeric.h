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

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xprop {

// Pairwise (cascade) summation. Reductions in the metrics and reports go
// through this so the result does not depend on thread count.
double pairwise_sum(std::span<const double> values);

inline double mean(std::span<const double> values) {
  return values.empty() ? 0.0
                        : pairwise_sum(values) / static_cast<double>(values.size());
}

// Sample standard deviation divided by sqrt(count); 0 for fewer than two values.
double standard_error(std::span<const double> values);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// Shortest decimal text that parses back to the same binary64.
std::string format_double(double value);

// Strict decimal parse of the whole token. Returns false on any junk.
bool parse_double(std::string_view token, double& out);
bool parse_uint(std::string_view token, std::uint64_t& out);

std::string hex64(std::uint64_t value);

}  // namespace xprop
