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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xprop {

struct FeatureEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  bool operator==(const FeatureEntry&) const = default;
};

using FeatureRow = std::vector<FeatureEntry>;
using LabelSet = std::vector<std::uint32_t>;

// Raised by the XMLC reader. what() names the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : std::runtime_error(message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Multi-label instances with sparse features. Index lists in every row are
// strictly increasing; feature indices are < d and label indices are < m.
struct SparseDataset {
  std::size_t d = 0;
  std::size_t m = 0;
  std::vector<FeatureRow> features;
  std::vector<LabelSet> labels;

  std::size_t n() const { return labels.size(); }

  // Throws std::invalid_argument if any invariant is violated.
  void validate() const;

  // Rows in the given order (duplicates allowed).
  SparseDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const SparseDataset&) const = default;
};

// XMLC repository format:
//   n d m
//   <l1,l2,...> <f:v> <f:v> ...
// An empty label list is written as a line starting with a space.
SparseDataset parse_xmlc(std::istream& in);
SparseDataset parse_xmlc(std::string_view text);
void write_xmlc(const SparseDataset& dataset, std::ostream& out);
std::string to_xmlc_string(const SparseDataset& dataset);

SparseDataset read_xmlc_file(const std::filesystem::path& path);
void write_xmlc_file(const SparseDataset& dataset,
                     const std::filesystem::path& path);

std::vector<std::size_t> label_counts(const SparseDataset& dataset);
std::size_t total_positives(const SparseDataset& dataset);

struct LabelPriors {
  std::size_t n = 0;  // instances in the source dataset
  double alpha = 0.0;
  std::vector<std::size_t> counts;
  std::vector<double> priors;

  std::size_t m() const { return priors.size(); }
};

// priors[j] = (count_j + alpha) / (n + alpha).
LabelPriors estimate_priors(const SparseDataset& dataset, double alpha = 1.0);

struct ImbalanceStats {
  double min_ir = 0.0;  // (1 - max prior) / max prior
  double ilir = 0.0;    // max prior / min prior
  double pos80 = 0.0;   // smallest label fraction holding 80% of positives
};

ImbalanceStats imbalance_stats(const LabelPriors& priors);

// Smallest c such that the c largest counts sum to at least 80% of the total,
// divided by the number of labels.
double pos80_fraction(std::span<const std::size_t> counts);

}  // namespace xprop
