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

#include "xprop/propensity.h"

namespace xprop {

struct LmConfig {
  int max_iter = 200;
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double tol = 1e-10;
};

// Least squares on inverse propensities:
//   sum_j w_j (1 / target_j - 1 / phi(prior_j))^2
struct FitProblem {
  PropensityFamily family = PropensityFamily::kPowerLaw;
  std::vector<double> priors;
  std::vector<double> targets;
  // Empty means unit weights.
  std::vector<double> weights;
  // Which entries of the parameter vector move. Empty means all of them,
  // except the dataset size n of JPV, which is held fixed.
  std::vector<bool> free_mask;
  // Dataset size for JPV.
  double n = 0;
  // Targets sitting on the clamp boundary (<= kMinPropensity or >= 1) get
  // weight 0, unless that would leave no label with positive weight.
  bool zero_weight_boundary = true;

  void validate() const;
  std::vector<double> effective_weights() const;
};

struct FitResult {
  std::vector<double> params;
  double mse = 0;  // unweighted mean over labels, see fit_mse
  int iterations = 0;
  bool converged = false;
  // JPV evaluated out of its codomain for some label at the final parameters.
  bool degenerate = false;
  // Weighted objective after the initial point and after each accepted step.
  std::vector<double> objective_history;

  PropensityModelSpec spec(PropensityFamily family) const {
    return {family, params};
  }
};

bool params_in_domain(PropensityFamily family, std::span<const double> params);

// Damped Gauss-Newton with a central-difference Jacobian. A step is accepted
// only if it lowers the objective and keeps the parameters in the family's
// domain. For JPV the init vector is (a, b) or (a, b, n); n defaults to the
// problem's n.
FitResult lm_fit(const FitProblem& problem, std::span<const double> init,
                 const LmConfig& config = {});

// Five starting points per family used by fit_family.
std::vector<std::vector<double>> default_init_grid(const FitProblem& problem);

// Best lm_fit over default_init_grid, by weighted objective.
FitResult fit_family(const FitProblem& problem, const LmConfig& config = {});

// Mean over labels of (1/p_j - 1/target_j)^2.
double fit_mse(const PropensityAssignment& assignment,
               std::span<const double> targets);
double fit_mse(std::span<const double> p, std::span<const double> targets);

}  // namespace xprop
