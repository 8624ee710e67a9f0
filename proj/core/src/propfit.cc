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

#include "xprop/propfit.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "xprop/numeric.h"

namespace xprop {

void FitProblem::validate() const {
  if (priors.size() != targets.size() || priors.empty()) {
    throw std::invalid_argument("fit problem: priors and targets must be non-empty and of equal length");
  }
  if (!weights.empty() && weights.size() != priors.size()) {
    throw std::invalid_argument("fit problem: weights length mismatch");
  }
  for (std::size_t j = 0; j < priors.size(); ++j) {
    if (!(priors[j] > 0.0 && priors[j] < 1.0)) {
      throw std::invalid_argument("fit problem: prior of label " +
                                  std::to_string(j) + " outside (0, 1)");
    }
    if (!(targets[j] > 0.0 && targets[j] <= 1.0)) {
      throw std::invalid_argument("fit problem: target of label " +
                                  std::to_string(j) + " outside (0, 1]");
    }
    if (!weights.empty() && !(weights[j] >= 0.0)) {
      throw std::invalid_argument("fit problem: negative weight");
    }
  }
  if (family == PropensityFamily::kDirectTable) {
    throw std::invalid_argument("fit problem: a direct table has nothing to fit");
  }
}

std::vector<double> FitProblem::effective_weights() const {
  std::vector<double> w =
      weights.empty() ? std::vector<double>(priors.size(), 1.0) : weights;
  if (!zero_weight_boundary) return w;
  std::vector<double> masked = w;
  bool any = false;
  for (std::size_t j = 0; j < masked.size(); ++j) {
    if (targets[j] <= kMinPropensity || targets[j] >= 1.0) masked[j] = 0.0;
    any = any || masked[j] > 0.0;
  }
  return any ? masked : w;
}

bool params_in_domain(PropensityFamily family, std::span<const double> p) {
  for (double v : p) {
    if (!std::isfinite(v)) return false;
  }
  switch (family) {
    case PropensityFamily::kConstant: return p[0] > 0.0 && p[0] <= 1.0;
    case PropensityFamily::kJpv: return p[2] >= 1.0;
    case PropensityFamily::kPowerLaw: return p[0] > 0.0 && p[1] >= 0.0;
    case PropensityFamily::kRichards: return p[5] != 0.0;
    case PropensityFamily::kDirectTable: return false;
  }
  return false;
}

namespace {

std::size_t family_arity(PropensityFamily f) {
  switch (f) {
    case PropensityFamily::kConstant: return 1;
    case PropensityFamily::kJpv: return 3;
    case PropensityFamily::kPowerLaw: return 2;
    case PropensityFamily::kRichards: return 6;
    case PropensityFamily::kDirectTable: return 0;
  }
  return 0;
}

class Objective {
 public:
  Objective(const FitProblem& problem)
      : problem_(problem),
        sqrt_w_(problem.priors.size()),
        inv_target_(problem.priors.size()) {
    const auto w = problem.effective_weights();
    for (std::size_t j = 0; j < w.size(); ++j) {
      sqrt_w_[j] = std::sqrt(w[j]);
      inv_target_[j] = 1.0 / problem.targets[j];
    }
  }

  // Residual vector, or nullopt outside the family's domain.
  std::optional<Eigen::VectorXd> residuals(std::span<const double> params) const {
    if (!params_in_domain(problem_.family, params)) return std::nullopt;
    const double n = problem_.family == PropensityFamily::kJpv ? params[2] : 0;
    Eigen::VectorXd r(problem_.priors.size());
    for (std::size_t j = 0; j < problem_.priors.size(); ++j) {
      const auto raw =
          evaluate_unclamped(problem_.family, params, problem_.priors[j], n);
      if (!raw || std::isnan(*raw)) return std::nullopt;
      const double p = std::isfinite(*raw) ? clamp_propensity(*raw) : 1.0;
      r[j] = sqrt_w_[j] * (inv_target_[j] - 1.0 / p);
    }
    return r;
  }

 private:
  const FitProblem& problem_;
  std::vector<double> sqrt_w_;
  std::vector<double> inv_target_;
};

bool jpv_degenerate(const FitProblem& problem, std::span<const double> params) {
  if (problem.family != PropensityFamily::kJpv) return false;
  if (params[2] < 3.0) return true;
  for (double prior : problem.priors) {
    const auto raw = evaluate_unclamped(problem.family, params, prior, params[2]);
    if (!raw || !(*raw > 0.0 && *raw <= 1.0)) return true;
  }
  return false;
}

std::vector<double> clamped_values(const FitProblem& problem,
                                   std::span<const double> params) {
  const double n = problem.family == PropensityFamily::kJpv ? params[2] : 0;
  std::vector<double> p(problem.priors.size(), 1.0);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto raw = evaluate_unclamped(problem.family, params, problem.priors[j], n);
    if (raw && std::isfinite(*raw)) p[j] = clamp_propensity(*raw);
  }
  return p;
}

}  // namespace

FitResult lm_fit(const FitProblem& problem, std::span<const double> init,
                 const LmConfig& config) {
  problem.validate();
  if (config.max_iter < 1) throw std::invalid_argument("lm_fit: max_iter must be >= 1");
  const std::size_t arity = family_arity(problem.family);

  std::vector<double> theta(init.begin(), init.end());
  if (problem.family == PropensityFamily::kJpv && theta.size() == 2) {
    theta.push_back(problem.n);
  }
  if (theta.size() != arity) {
    throw std::invalid_argument("lm_fit: expected " + std::to_string(arity) +
                                " initial parameters");
  }

  std::vector<bool> mask = problem.free_mask;
  if (mask.empty()) {
    mask.assign(arity, true);
    if (problem.family == PropensityFamily::kJpv) mask[2] = false;
  }
  if (mask.size() != arity) throw std::invalid_argument("lm_fit: free_mask length");
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < arity; ++i) {
    if (mask[i]) free.push_back(i);
  }

  const Objective objective(problem);
  auto r0 = objective.residuals(theta);
  if (!r0) throw std::domain_error("lm_fit: initial parameters outside the family domain");

  FitResult result;
  Eigen::VectorXd r = *r0;
  double cost = r.squaredNorm();
  result.objective_history.push_back(cost);
  double lambda = config.lambda0;
  const std::size_t k = free.size();
  const std::size_t m = problem.priors.size();

  bool done = k == 0 || cost == 0.0;
  result.converged = done;
  int iter = 0;
  while (!done && iter < config.max_iter) {
    ++iter;
    // Central differences; one-sided where the probe leaves the domain.
    Eigen::MatrixXd jac(m, k);
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t i = free[c];
      const double h = 1e-6 * std::max(std::abs(theta[i]), 1.0);
      std::vector<double> hi = theta, lo = theta;
      hi[i] += h;
      lo[i] -= h;
      const auto rh = objective.residuals(hi);
      const auto rl = objective.residuals(lo);
      if (rh && rl) {
        jac.col(c) = (*rh - *rl) / (2 * h);
      } else if (rh) {
        jac.col(c) = (*rh - r) / h;
      } else if (rl) {
        jac.col(c) = (r - *rl) / h;
      } else {
        jac.col(c).setZero();
      }
    }
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < config.tol) {
      result.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;

    while (true) {
      Eigen::MatrixXd damped = jtj;
      for (std::size_t c = 0; c < k; ++c) {
        damped(c, c) += lambda * std::max(jtj(c, c), 1e-12);
      }
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      Eigen::VectorXd delta;
      bool solved = ldlt.info() == Eigen::Success;
      if (solved) {
        delta = ldlt.solve(-grad);
        solved = delta.allFinite();
      }
      if (solved) {
        std::vector<double> trial = theta;
        for (std::size_t c = 0; c < k; ++c) trial[free[c]] += delta[c];
        const auto rt = objective.residuals(trial);
        const double trial_cost =
            rt ? rt->squaredNorm() : std::numeric_limits<double>::infinity();
        if (trial_cost < cost) {
          const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
          theta = std::move(trial);
          r = *rt;
          cost = trial_cost;
          result.objective_history.push_back(cost);
          lambda = std::max(lambda * config.lambda_down, 1e-15);
          if (rel < config.tol || cost == 0.0) {
            result.converged = true;
            done = true;
          }
          break;
        }
        double theta_norm = 0;
        for (double v : theta) theta_norm += v * v;
        if (delta.norm() <= config.tol * (std::sqrt(theta_norm) + config.tol)) {
          // The step has shrunk below resolution: no further descent possible.
          result.converged = true;
          done = true;
          break;
        }
      }
      lambda *= config.lambda_up;
      if (lambda > 1e16) {
        done = true;
        break;
      }
    }
  }

  result.iterations = iter;
  result.params = theta;
  result.degenerate = jpv_degenerate(problem, theta);
  result.mse = fit_mse(clamped_values(problem, theta), problem.targets);
  return result;
}

std::vector<std::vector<double>> default_init_grid(const FitProblem& problem) {
  const double max_prior =
      *std::max_element(problem.priors.begin(), problem.priors.end());
  const double mean_prior =
      std::accumulate(problem.priors.begin(), problem.priors.end(), 0.0) /
      static_cast<double>(problem.priors.size());
  const double beta0 = 1.0 / max_prior;
  const double g0 = 1.0 / mean_prior;
  const double n = problem.n;
  switch (problem.family) {
    case PropensityFamily::kConstant:
      return {{0.1}, {0.3}, {0.5}, {0.7}, {0.9}};
    case PropensityFamily::kJpv:
      return {{0.55, 1.5, n}, {0.5, 0.4, n}, {0.6, 2.6, n}, {1.0, 1.0, n},
              {0.3, 5.0, n}};
    case PropensityFamily::kPowerLaw:
      return {{beta0, 0.1}, {beta0, 0.5}, {beta0, 1.0}, {1.0, 0.3}, {1.0, 1.0}};
    case PropensityFamily::kRichards:
      return {{0, 1, 1, 1, g0, 1},
              {0, 1, 1, 10, g0, 1},
              {0, 1, 1, 1, 10 * g0, 1},
              {0.05, 1, 1, 5, g0, 0.5},
              {0, 1, 1, 1, 0.1 * g0, 1}};
    case PropensityFamily::kDirectTable:
      break;
  }
  throw std::invalid_argument("no init grid for this family");
}

FitResult fit_family(const FitProblem& problem, const LmConfig& config) {
  std::optional<FitResult> best;
  for (const auto& init : default_init_grid(problem)) {
    FitResult r;
    try {
      r = lm_fit(problem, init, config);
    } catch (const std::domain_error&) {
      continue;
    }
    if (!best || r.objective_history.back() < best->objective_history.back()) {
      best = std::move(r);
    }
  }
  if (!best) throw std::domain_error("fit_family: no starting point inside the domain");
  return *best;
}

double fit_mse(std::span<const double> p, std::span<const double> targets) {
  if (p.size() != targets.size() || p.empty()) {
    throw std::invalid_argument("fit_mse: length mismatch");
  }
  std::vector<double> sq(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double diff = 1.0 / p[j] - 1.0 / targets[j];
    sq[j] = diff * diff;
  }
  return mean(sq);
}

double fit_mse(const PropensityAssignment& assignment,
               std::span<const double> targets) {
  return fit_mse(assignment.p, targets);
}

}  // namespace xprop
