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

#include "xprop/report.h"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "xprop/numeric.h"

namespace xprop {

Table& ExperimentReport::add_table(std::string name, std::vector<std::string> columns) {
  if (find(name) != nullptr) throw std::logic_error("duplicate table " + name);
  Table t;
  t.name = std::move(name);
  t.columns = {"seed", "config_hash"};
  t.columns.insert(t.columns.end(), columns.begin(), columns.end());
  tables.push_back(std::move(t));
  return tables.back();
}

void ExperimentReport::add_row(std::string_view table, std::string seed,
                               std::vector<std::string> cells) {
  auto it = std::find_if(tables.begin(), tables.end(),
                         [&](const Table& t) { return t.name == table; });
  if (it == tables.end()) throw std::logic_error("no table " + std::string(table));
  if (cells.size() + 2 != it->columns.size()) {
    throw std::logic_error("row width mismatch in table " + it->name);
  }
  std::vector<std::string> row{std::move(seed), hex64(config_hash)};
  row.insert(row.end(), std::make_move_iterator(cells.begin()),
             std::make_move_iterator(cells.end()));
  it->rows.push_back(std::move(row));
}

const Table* ExperimentReport::find(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

namespace {

void write_row(std::string& out, const std::vector<std::string>& cells, std::size_t from) {
  for (std::size_t c = from; c < cells.size(); ++c) {
    if (c > from) out += '\t';
    out += cells[c];
  }
  out += '\n';
}

}  // namespace

std::string ExperimentReport::to_tsv() const {
  std::string out = "# xprop-lab " + std::string(kArtifactVersion) + "\n";
  out += "# experiment: " + experiment + "\n";
  out += "# config_hash: " + hex64(config_hash) + "\n";
  out += "# seeds:";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    out += (i == 0 ? " " : ",") + std::to_string(seeds[i]);
  }
  out += "\n";
  for (const auto& t : tables) {
    out += "## table: " + t.name + "\n";
    write_row(out, t.columns, 0);
    for (const auto& r : t.rows) write_row(out, r, 0);
  }
  for (const auto& f : footnotes) out += "# note: " + f + "\n";
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> label_frequency(
    std::span<const std::size_t> counts) {
  if (counts.empty()) throw std::invalid_argument("label frequency of an empty label set");
  std::vector<std::size_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(sorted.size());
  for (std::size_t r = 0; r < sorted.size(); ++r) out.emplace_back(r + 1, sorted[r]);
  return out;
}

std::string emit_plot_data(const ExperimentReport& report, std::string_view which) {
  if (which != "label_frequency" && which != "propensity_scatter") {
    throw std::invalid_argument("unknown plot series '" + std::string(which) + "'");
  }
  const Table* t = report.find(which);
  if (t == nullptr) {
    throw std::invalid_argument("report has no '" + std::string(which) + "' series");
  }
  std::string out;
  write_row(out, t->columns, 2);
  for (const auto& r : t->rows) write_row(out, r, 2);
  return out;
}

}  // namespace xprop
