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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xprop {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

struct Table {
  std::string name;
  // The first two columns are always "seed" and "config_hash".
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Tables of results plus the provenance needed to reproduce them. Rendering
// is deterministic: no timestamps, fixed number formatting, rows in insertion
// order.
struct ExperimentReport {
  std::string experiment;
  std::uint64_t config_hash = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<Table> tables;
  std::vector<std::string> footnotes;

  Table& add_table(std::string name, std::vector<std::string> columns);
  // `seed` is a seed value or "all" for rows aggregated over seeds.
  void add_row(std::string_view table, std::string seed, std::vector<std::string> cells);
  const Table* find(std::string_view name) const;

  std::string to_tsv() const;
};

// (rank, count) with counts sorted in decreasing order; ranks start at 1.
// Throws std::invalid_argument on an empty input.
std::vector<std::pair<std::size_t, std::size_t>> label_frequency(
    std::span<const std::size_t> counts);

// Plot-ready TSV for the series table named `which` ("label_frequency" or
// "propensity_scatter"), without the provenance columns. Throws
// std::invalid_argument if the report lacks that series.
std::string emit_plot_data(const ExperimentReport& report, std::string_view which);

}  // namespace xprop
