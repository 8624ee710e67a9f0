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
#include <span>
#include <vector>

namespace xprop {

// Label vectors over m <= 3 labels are encoded as bit masks: bit j set means
// label j is relevant (or observed).
//
// observed_given_true[y][o] = P[observed = o | true = y]. Observed labels
// can only drop relevant ones, so mass is allowed only where (o & ~y) == 0.
struct MaskModel {
  std::size_t m = 0;
  std::vector<std::vector<double>> observed_given_true;

  void validate() const;
};

struct FeasibilityResult {
  bool feasible = false;
  double residual = 0;          // Euclidean norm of the least-squares residual
  std::vector<double> solution;  // observed-vector loss values v_o
  std::size_t equations = 0;
  std::size_t unknowns = 0;
};

inline constexpr double kFeasibilityTolerance = 1e-9;

// Looks for observed-label loss values v such that, for every model in
// `models` and every degenerate true-label distribution y,
//   sum_o P[o | y] v_o = target_loss[y].
// All models must be satisfied by the same v, which is what an estimator that
// only knows the marginal propensities would need.
FeasibilityResult check_unbiased_estimator_exists(
    std::size_t m, const std::vector<MaskModel>& models,
    std::span<const double> target_loss);

MaskModel no_noise_masks(std::size_t m);
// Each label dropped independently, kept with its own propensity.
MaskModel independent_masks(std::span<const double> propensities);
// Two labels; when both are relevant they go missing together.
MaskModel joint_missing_masks(double p);
// Two labels with p = 0.5; when both are relevant exactly one is observed.
MaskModel complementary_missing_masks();

// Loss tables over all true vectors y for one fixed prediction.
std::vector<double> subset_zero_one_loss(std::size_t m, unsigned prediction);
std::vector<double> hamming_loss(std::size_t m, unsigned prediction);

}  // namespace xprop
