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
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "xprop/dataset.h"
#include "xprop/propensity.h"

namespace xprop {

// Synthetic multi-label data: the feature space is the unit ball in R^dim and
// label j is the set of points inside a smaller ball S_j contained in it.
struct HyperBallConfig {
  std::size_t m = 100;
  std::size_t dim = 4;
  // Radii are log-uniform on [r_min, r_max].
  double r_min = 0.05;
  double r_max = 0.5;
  std::uint64_t seed = 1;
  std::size_t n_train = 10000;
  std::size_t n_val = 1000;
  std::size_t n_test = 5000;
  // Appends ||x||^2 as feature `dim`. Each label region is then a half-space
  // of the feature vector, so a linear model can represent it exactly.
  bool squared_norm_feature = true;

  void validate() const;
  std::size_t feature_dim() const { return dim + (squared_norm_feature ? 1 : 0); }
};

struct HyperBallData {
  SparseDataset train;
  SparseDataset val;
  SparseDataset test;
  // priors = r_j^dim (exact volume ratio); counts are training-set counts.
  LabelPriors true_priors;
  std::vector<double> radii;
  std::vector<std::vector<double>> centers;
};

HyperBallData generate_hyperball(const HyperBallConfig& config);

struct NoiseTrace {
  std::uint64_t seed = 0;
  PropensityAssignment model;
  std::size_t removed = 0;
  std::size_t kept = 0;
};

struct BiasedDataset {
  SparseDataset data;
  NoiseTrace trace;
};

// Keeps each relevant (i, j) independently with probability p_j. Features and
// irrelevant labels are untouched.
BiasedDataset inject_missing(const SparseDataset& clean,
                             const PropensityAssignment& p, std::uint64_t seed);

struct ResplitResult {
  SparseDataset train;
  SparseDataset test;
  std::optional<SparseDataset> val;
  // Original index of every surviving label, in new-index order.
  std::vector<std::uint32_t> kept_labels;
};

// Drops labels with fewer than `min_positives` positives, re-indexes the rest
// densely, shuffles and splits by `fractions` = (train, test). A positive
// `val_share` moves that share of the test portion into a validation set.
ResplitResult resplit_benchmark(const SparseDataset& full,
                                std::size_t min_positives,
                                std::span<const double> fractions,
                                std::uint64_t seed, double val_share = 0.0);

// Instances of `b` appended to those of `a`; d and m must agree.
SparseDataset concatenate(const SparseDataset& a, const SparseDataset& b);

struct Rating {
  std::uint64_t user = 0;
  std::uint32_t item = 0;
  int rating = 0;
};

// Lines "user<TAB>item<TAB>rating"; blank lines are ignored.
std::vector<Rating> parse_ratings(std::istream& in);

struct RatingsDataset {
  SparseDataset train;
  SparseDataset test;
  double p_controlled = 1.0;
  std::size_t skipped_users = 0;
};

// Turns user-item ratings into multi-label data with items as both features
// and labels. Users only present in `biased` form the training set: their
// positives are split at random into a feature half (the larger one for odd
// counts) and a label half. Users present in both form the test set: a random
// half of their biased positives are features and all their `controlled`
// positives are labels. Users with fewer than two biased positives are
// skipped. p_controlled = probe_size / m.
RatingsDataset ratings_to_multilabel(std::span<const Rating> biased,
                                     std::span<const Rating> controlled,
                                     std::size_t m, int threshold,
                                     std::size_t probe_size, std::uint64_t seed);

}  // namespace xprop
