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

#include "xprop/datagen.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "xprop/numeric.h"
#include "xprop/rng.h"

namespace xprop {

void HyperBallConfig::validate() const {
  if (m < 1) throw std::invalid_argument("hyper-ball: m must be >= 1");
  if (dim < 2) throw std::invalid_argument("hyper-ball: dim must be >= 2");
  if (!(r_min > 0.0 && r_min <= r_max && r_max < 1.0)) {
    throw std::invalid_argument("hyper-ball: need 0 < r_min <= r_max < 1");
  }
  if (n_train < 1 || n_test < 1) {
    throw std::invalid_argument("hyper-ball: n_train and n_test must be >= 1");
  }
}

namespace {

// Uniform point in the ball of the given radius: uniform direction, norm
// radius * U^(1/dim).
std::vector<double> sample_in_ball(Rng& rng, std::size_t dim, double radius) {
  std::vector<double> x(dim);
  double norm2 = 0;
  do {
    norm2 = 0;
    for (auto& v : x) {
      v = rng.normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double scale = radius *
                       std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) /
                       std::sqrt(norm2);
  for (auto& v : x) v *= scale;
  return x;
}

}  // namespace

HyperBallData generate_hyperball(const HyperBallConfig& config) {
  config.validate();
  const std::size_t dim = config.dim;
  HyperBallData out;
  out.radii.resize(config.m);
  out.centers.resize(config.m);
  const double log_lo = std::log(config.r_min), log_hi = std::log(config.r_max);
  for (std::size_t j = 0; j < config.m; ++j) {
    Rng rng = Rng::derive(config.seed, "hyperball/label", j);
    const double r = config.r_min == config.r_max
                         ? config.r_min
                         : std::exp(rng.uniform(log_lo, log_hi));
    out.radii[j] = r;
    out.centers[j] = sample_in_ball(rng, dim, 1.0 - r);
  }

  const std::size_t total = config.n_train + config.n_val + config.n_test;
  SparseDataset all;
  all.d = config.feature_dim();
  all.m = config.m;
  all.features.resize(total);
  all.labels.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    Rng rng = Rng::derive(config.seed, "hyperball/instance", i);
    const auto x = sample_in_ball(rng, dim, 1.0);
    auto& row = all.features[i];
    double norm2 = 0;
    for (std::size_t t = 0; t < dim; ++t) {
      row.push_back({static_cast<std::uint32_t>(t), x[t]});
      norm2 += x[t] * x[t];
    }
    if (config.squared_norm_feature) {
      row.push_back({static_cast<std::uint32_t>(dim), norm2});
    }
    for (std::size_t j = 0; j < config.m; ++j) {
      double dist2 = 0;
      for (std::size_t t = 0; t < dim; ++t) {
        const double diff = x[t] - out.centers[j][t];
        dist2 += diff * diff;
      }
      if (dist2 <= out.radii[j] * out.radii[j]) {
        all.labels[i].push_back(static_cast<std::uint32_t>(j));
      }
    }
  }

  auto slice = [&](std::size_t from, std::size_t count) {
    std::vector<std::size_t> rows(count);
    std::iota(rows.begin(), rows.end(), from);
    return all.subset(rows);
  };
  out.train = slice(0, config.n_train);
  out.val = slice(config.n_train, config.n_val);
  out.test = slice(config.n_train + config.n_val, config.n_test);

  out.true_priors.n = config.n_train;
  out.true_priors.alpha = 0.0;
  out.true_priors.counts = label_counts(out.train);
  out.true_priors.priors.resize(config.m);
  for (std::size_t j = 0; j < config.m; ++j) {
    out.true_priors.priors[j] =
        std::pow(out.radii[j], static_cast<double>(dim));
  }
  return out;
}

BiasedDataset inject_missing(const SparseDataset& clean,
                             const PropensityAssignment& p, std::uint64_t seed) {
  if (p.m() != clean.m) {
    throw std::invalid_argument("inject_missing: propensity length differs from m");
  }
  BiasedDataset out;
  out.data.d = clean.d;
  out.data.m = clean.m;
  out.data.features = clean.features;
  out.data.labels.resize(clean.n());
  out.trace.seed = seed;
  out.trace.model = p;
  for (std::size_t i = 0; i < clean.n(); ++i) {
    Rng rng = Rng::derive(seed, "inject", i);
    for (auto j : clean.labels[i]) {
      if (rng.uniform() < p.p[j]) {
        out.data.labels[i].push_back(j);
        ++out.trace.kept;
      } else {
        ++out.trace.removed;
      }
    }
  }
  return out;
}

SparseDataset concatenate(const SparseDataset& a, const SparseDataset& b) {
  if (a.d != b.d || a.m != b.m) {
    throw std::invalid_argument("concatenate: datasets differ in d or m");
  }
  SparseDataset out = a;
  out.features.insert(out.features.end(), b.features.begin(), b.features.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

ResplitResult resplit_benchmark(const SparseDataset& full,
                                std::size_t min_positives,
                                std::span<const double> fractions,
                                std::uint64_t seed, double val_share) {
  if (min_positives < 1) throw std::invalid_argument("resplit: s must be >= 1");
  if (fractions.size() != 2 || fractions[0] < 0 || fractions[1] < 0 ||
      std::abs(fractions[0] + fractions[1] - 1.0) > 1e-9) {
    throw std::invalid_argument("resplit: fractions must be (train, test) summing to 1");
  }
  if (!(val_share >= 0.0 && val_share < 1.0)) {
    throw std::invalid_argument("resplit: val_share must be in [0, 1)");
  }

  const auto counts = label_counts(full);
  ResplitResult out;
  std::vector<std::int64_t> remap(full.m, -1);
  for (std::size_t j = 0; j < full.m; ++j) {
    if (counts[j] >= min_positives) {
      remap[j] = static_cast<std::int64_t>(out.kept_labels.size());
      out.kept_labels.push_back(static_cast<std::uint32_t>(j));
    }
  }
  if (out.kept_labels.empty()) {
    throw std::invalid_argument("resplit: every label has fewer than " +
                                std::to_string(min_positives) + " positives");
  }

  SparseDataset relabeled;
  relabeled.d = full.d;
  relabeled.m = out.kept_labels.size();
  relabeled.features = full.features;
  relabeled.labels.resize(full.n());
  for (std::size_t i = 0; i < full.n(); ++i) {
    for (auto j : full.labels[i]) {
      if (remap[j] >= 0) {
        relabeled.labels[i].push_back(static_cast<std::uint32_t>(remap[j]));
      }
    }
  }

  std::vector<std::size_t> order(full.n());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::derive(seed, "resplit");
  rng.shuffle(order);

  const auto n = static_cast<double>(full.n());
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const std::span<const std::size_t> all(order);
  out.train = relabeled.subset(all.first(n_train));
  const auto test_rows = all.subspan(n_train);
  if (val_share > 0.0) {
    const auto n_val = static_cast<std::size_t>(
        std::llround(val_share * static_cast<double>(test_rows.size())));
    out.val = relabeled.subset(test_rows.first(n_val));
    out.test = relabeled.subset(test_rows.subspan(n_val));
  } else {
    out.test = relabeled.subset(test_rows);
  }
  return out;
}

std::vector<Rating> parse_ratings(std::istream& in) {
  std::vector<Rating> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view s = line;
    const auto t1 = s.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : s.find('\t', t1 + 1);
    std::uint64_t user = 0, item = 0, rating = 0;
    if (t2 == std::string_view::npos || !parse_uint(s.substr(0, t1), user) ||
        !parse_uint(s.substr(t1 + 1, t2 - t1 - 1), item) ||
        !parse_uint(s.substr(t2 + 1), rating)) {
      throw ParseError("malformed rating '" + line + "' at line " +
                           std::to_string(line_no),
                       line_no);
    }
    out.push_back({user, static_cast<std::uint32_t>(item), static_cast<int>(rating)});
  }
  return out;
}

RatingsDataset ratings_to_multilabel(std::span<const Rating> biased,
                                     std::span<const Rating> controlled,
                                     std::size_t m, int threshold,
                                     std::size_t probe_size, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("ratings: m must be >= 1");
  using Positives = std::map<std::uint64_t, std::vector<std::uint32_t>>;
  auto collect = [&](std::span<const Rating> ratings, Positives& pos,
                     std::map<std::uint64_t, bool>& seen) {
    for (const auto& r : ratings) {
      if (r.item >= m) {
        throw std::invalid_argument("ratings: item " + std::to_string(r.item) +
                                    " >= m=" + std::to_string(m));
      }
      seen[r.user] = true;
      if (r.rating >= threshold) pos[r.user].push_back(r.item);
    }
  };
  Positives biased_pos, controlled_pos;
  std::map<std::uint64_t, bool> biased_users, controlled_users;
  collect(biased, biased_pos, biased_users);
  collect(controlled, controlled_pos, controlled_users);

  RatingsDataset out;
  out.p_controlled = static_cast<double>(probe_size) / static_cast<double>(m);
  for (auto* ds : {&out.train, &out.test}) {
    ds->d = m;
    ds->m = m;
  }
  auto to_row = [](std::vector<std::uint32_t> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return items;
  };

  for (const auto& [user, _] : biased_users) {
    auto it = biased_pos.find(user);
    std::vector<std::uint32_t> items =
        it == biased_pos.end() ? std::vector<std::uint32_t>{} : to_row(it->second);
    if (items.size() < 2) {
      ++out.skipped_users;
      continue;
    }
    Rng rng = Rng::derive(seed, "ratings/user", user);
    rng.shuffle(items);
    const std::size_t half = (items.size() + 1) / 2;
    std::vector<std::uint32_t> feat(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(half));
    std::sort(feat.begin(), feat.end());
    FeatureRow row;
    for (auto f : feat) row.push_back({f, 1.0});

    const bool is_test = controlled_users.contains(user);
    LabelSet labels;
    if (is_test) {
      auto c = controlled_pos.find(user);
      if (c != controlled_pos.end()) labels = to_row(c->second);
    } else {
      labels.assign(items.begin() + static_cast<std::ptrdiff_t>(half), items.end());
      std::sort(labels.begin(), labels.end());
    }
    auto& ds = is_test ? out.test : out.train;
    ds.features.push_back(std::move(row));
    ds.labels.push_back(std::move(labels));
  }
  return out;
}

}  // namespace xprop
