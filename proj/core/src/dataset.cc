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

#include "xprop/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "xprop/numeric.h"

namespace xprop {

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail(const std::string& what, std::size_t line) {
  throw ParseError(what + " at line " + std::to_string(line), line);
}

void parse_instance(std::string_view line, std::size_t line_no, std::size_t d,
                    std::size_t m, FeatureRow& features, LabelSet& labels) {
  std::string_view rest = line;
  if (!line.empty() && line.front() != ' ' && line.front() != '\t') {
    const std::size_t cut = line.find_first_of(" \t");
    const std::string_view list = line.substr(0, cut);
    rest = cut == std::string_view::npos ? std::string_view{} : line.substr(cut);
    if (list.find(':') != std::string_view::npos) {
      fail("expected a label list, found feature '" + std::string(list) + "'",
           line_no);
    }
    std::size_t start = 0;
    while (start <= list.size()) {
      std::size_t comma = list.find(',', start);
      if (comma == std::string_view::npos) comma = list.size();
      const std::string_view tok = list.substr(start, comma - start);
      std::uint64_t label = 0;
      if (!parse_uint(tok, label)) {
        fail("non-numeric label '" + std::string(tok) + "'", line_no);
      }
      if (label >= m) {
        fail("label index " + std::to_string(label) + " ≥ m=" +
                 std::to_string(m),
             line_no);
      }
      labels.push_back(static_cast<std::uint32_t>(label));
      start = comma + 1;
    }
    std::sort(labels.begin(), labels.end());
    const auto dup = std::adjacent_find(labels.begin(), labels.end());
    if (dup != labels.end()) {
      fail("duplicate label index " + std::to_string(*dup), line_no);
    }
  }

  for (std::string_view tok : split_ws(rest)) {
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos) {
      fail("malformed feature '" + std::string(tok) + "'", line_no);
    }
    std::uint64_t index = 0;
    double value = 0.0;
    if (!parse_uint(tok.substr(0, colon), index)) {
      fail("non-numeric feature index in '" + std::string(tok) + "'", line_no);
    }
    if (!parse_double(tok.substr(colon + 1), value)) {
      fail("non-numeric feature value in '" + std::string(tok) + "'", line_no);
    }
    if (index >= d) {
      fail("feature index " + std::to_string(index) + " ≥ d=" +
               std::to_string(d),
           line_no);
    }
    features.push_back({static_cast<std::uint32_t>(index), value});
  }
  std::sort(features.begin(), features.end(),
            [](const FeatureEntry& a, const FeatureEntry& b) {
              return a.index < b.index;
            });
  const auto dup = std::adjacent_find(
      features.begin(), features.end(),
      [](const FeatureEntry& a, const FeatureEntry& b) {
        return a.index == b.index;
      });
  if (dup != features.end()) {
    fail("duplicate feature index " + std::to_string(dup->index), line_no);
  }
}

}  // namespace

void SparseDataset::validate() const {
  if (features.size() != labels.size()) {
    throw std::invalid_argument("feature and label row counts differ");
  }
  if (n() == 0 || d == 0 || m == 0) {
    throw std::invalid_argument("dataset must have n, d, m >= 1");
  }
  for (std::size_t i = 0; i < n(); ++i) {
    const auto& f = features[i];
    for (std::size_t t = 0; t < f.size(); ++t) {
      if (f[t].index >= d || (t > 0 && f[t].index <= f[t - 1].index)) {
        throw std::invalid_argument("bad feature indices in row " +
                                    std::to_string(i));
      }
    }
    const auto& l = labels[i];
    for (std::size_t t = 0; t < l.size(); ++t) {
      if (l[t] >= m || (t > 0 && l[t] <= l[t - 1])) {
        throw std::invalid_argument("bad label indices in row " +
                                    std::to_string(i));
      }
    }
  }
}

SparseDataset SparseDataset::subset(std::span<const std::size_t> rows) const {
  SparseDataset out;
  out.d = d;
  out.m = m;
  out.features.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.features.push_back(features.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

SparseDataset parse_xmlc(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail("malformed header: empty input", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto head = split_ws(line);
  std::uint64_t n = 0, d = 0, m = 0;
  if (head.size() != 3 || !parse_uint(head[0], n) || !parse_uint(head[1], d) ||
      !parse_uint(head[2], m)) {
    fail("malformed header '" + line + "'", line_no);
  }
  if (n == 0 || d == 0 || m == 0) {
    fail("malformed header: n, d, m must be positive", line_no);
  }

  SparseDataset ds;
  ds.d = d;
  ds.m = m;
  ds.features.resize(n);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ++line_no;
    if (!std::getline(in, line)) {
      fail("expected " + std::to_string(n) + " instances, found " +
               std::to_string(i),
           line_no);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    parse_instance(line, line_no, d, m, ds.features[i], ds.labels[i]);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) fail("unexpected data after the last instance", line_no);
  }
  return ds;
}

SparseDataset parse_xmlc(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_xmlc(in);
}

void write_xmlc(const SparseDataset& dataset, std::ostream& out) {
  out << dataset.n() << ' ' << dataset.d << ' ' << dataset.m << '\n';
  std::string line;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    line.clear();
    const auto& labels = dataset.labels[i];
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (t > 0) line += ',';
      line += std::to_string(labels[t]);
    }
    for (const auto& f : dataset.features[i]) {
      line += ' ';
      line += std::to_string(f.index);
      line += ':';
      line += format_double(f.value);
    }
    if (line.empty()) line = " ";
    out << line << '\n';
  }
}

std::string to_xmlc_string(const SparseDataset& dataset) {
  std::ostringstream out;
  write_xmlc(dataset, out);
  return out.str();
}

SparseDataset read_xmlc_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_xmlc(in);
}

void write_xmlc_file(const SparseDataset& dataset,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_xmlc(dataset, out);
}

std::vector<std::size_t> label_counts(const SparseDataset& dataset) {
  std::vector<std::size_t> counts(dataset.m, 0);
  for (const auto& labels : dataset.labels) {
    for (auto j : labels) ++counts[j];
  }
  return counts;
}

std::size_t total_positives(const SparseDataset& dataset) {
  std::size_t total = 0;
  for (const auto& labels : dataset.labels) total += labels.size();
  return total;
}

LabelPriors estimate_priors(const SparseDataset& dataset, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  LabelPriors out;
  out.n = dataset.n();
  out.alpha = alpha;
  out.counts = label_counts(dataset);
  out.priors.resize(dataset.m);
  const double denom = static_cast<double>(out.n) + alpha;
  for (std::size_t j = 0; j < dataset.m; ++j) {
    out.priors[j] =
        denom > 0 ? (static_cast<double>(out.counts[j]) + alpha) / denom : 0.0;
  }
  return out;
}

double pos80_fraction(std::span<const std::size_t> counts) {
  if (counts.empty()) throw std::invalid_argument("no labels");
  std::vector<std::size_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t total =
      std::accumulate(sorted.begin(), sorted.end(), std::size_t{0});
  if (total == 0) throw std::invalid_argument("no positive label assignments");
  // Integer test for prefix >= 0.8 * total, i.e. 5 * prefix >= 4 * total.
  std::size_t prefix = 0;
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    prefix += sorted[c];
    if (5 * prefix >= 4 * total) {
      return static_cast<double>(c + 1) / static_cast<double>(sorted.size());
    }
  }
  return 1.0;
}

ImbalanceStats imbalance_stats(const LabelPriors& priors) {
  if (priors.m() == 0) throw std::invalid_argument("no labels");
  const auto [lo, hi] =
      std::minmax_element(priors.priors.begin(), priors.priors.end());
  if (!(*lo > 0.0)) {
    throw std::domain_error("ILIR undefined: a label prior is zero");
  }
  ImbalanceStats s;
  s.min_ir = (1.0 - *hi) / *hi;
  s.ilir = *hi / *lo;
  s.pos80 = pos80_fraction(priors.counts);
  return s;
}

}  // namespace xprop
