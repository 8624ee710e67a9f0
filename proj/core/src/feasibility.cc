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

#include "xprop/feasibility.h"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace xprop {

namespace {

std::size_t states(std::size_t m) { return std::size_t{1} << m; }

void check_m(std::size_t m) {
  if (m < 1 || m > 3) throw std::invalid_argument("mask model: m must be in [1, 3]");
}

}  // namespace

void MaskModel::validate() const {
  check_m(m);
  const std::size_t s = states(m);
  if (observed_given_true.size() != s) {
    throw std::invalid_argument("mask model: expected 2^m conditional distributions");
  }
  for (std::size_t y = 0; y < s; ++y) {
    const auto& row = observed_given_true[y];
    if (row.size() != s) {
      throw std::invalid_argument("mask model: distribution for y=" +
                                  std::to_string(y) + " has wrong length");
    }
    double total = 0;
    for (std::size_t o = 0; o < s; ++o) {
      if (row[o] < 0.0 || !std::isfinite(row[o])) {
        throw std::invalid_argument("mask model: negative mass");
      }
      if (row[o] > 0.0 && (o & ~y) != 0) {
        throw std::invalid_argument(
            "mask model: mass on an observed vector that is not below y=" +
            std::to_string(y));
      }
      total += row[o];
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("mask model: distribution for y=" +
                                  std::to_string(y) + " does not sum to 1");
    }
  }
}

FeasibilityResult check_unbiased_estimator_exists(
    std::size_t m, const std::vector<MaskModel>& models,
    std::span<const double> target_loss) {
  check_m(m);
  const std::size_t s = states(m);
  if (models.empty()) throw std::invalid_argument("feasibility: no mask models");
  if (target_loss.size() != s) {
    throw std::invalid_argument("feasibility: target loss needs 2^m entries");
  }
  for (const auto& model : models) {
    if (model.m != m) throw std::invalid_argument("feasibility: model m differs");
    model.validate();
  }

  const std::size_t rows = models.size() * s;
  Eigen::MatrixXd a(rows, s);
  Eigen::VectorXd b(rows);
  for (std::size_t t = 0; t < models.size(); ++t) {
    for (std::size_t y = 0; y < s; ++y) {
      const std::size_t r = t * s + y;
      for (std::size_t o = 0; o < s; ++o) a(r, o) = models[t].observed_given_true[y][o];
      b[r] = target_loss[y];
    }
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd v = cod.solve(b);

  FeasibilityResult out;
  out.equations = rows;
  out.unknowns = s;
  out.residual = (a * v - b).norm();
  out.feasible = out.residual <= kFeasibilityTolerance;
  out.solution.assign(v.data(), v.data() + v.size());
  return out;
}

MaskModel no_noise_masks(std::size_t m) {
  check_m(m);
  MaskModel model{m, {}};
  const std::size_t s = states(m);
  model.observed_given_true.assign(s, std::vector<double>(s, 0.0));
  for (std::size_t y = 0; y < s; ++y) model.observed_given_true[y][y] = 1.0;
  return model;
}

MaskModel independent_masks(std::span<const double> propensities) {
  const std::size_t m = propensities.size();
  check_m(m);
  MaskModel model{m, {}};
  const std::size_t s = states(m);
  model.observed_given_true.assign(s, std::vector<double>(s, 0.0));
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t o = 0; o < s; ++o) {
      if ((o & ~y) != 0) continue;
      double prob = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (!(y >> j & 1)) continue;
        prob *= (o >> j & 1) ? propensities[j] : 1.0 - propensities[j];
      }
      model.observed_given_true[y][o] = prob;
    }
  }
  return model;
}

MaskModel joint_missing_masks(double p) {
  const double pp[2] = {p, p};
  MaskModel model = independent_masks(pp);
  auto& both = model.observed_given_true[0b11];
  both = {1.0 - p, 0.0, 0.0, p};
  return model;
}

MaskModel complementary_missing_masks() {
  MaskModel model = joint_missing_masks(0.5);
  model.observed_given_true[0b11] = {0.0, 0.5, 0.5, 0.0};
  return model;
}

std::vector<double> subset_zero_one_loss(std::size_t m, unsigned prediction) {
  check_m(m);
  std::vector<double> loss(states(m));
  for (std::size_t y = 0; y < loss.size(); ++y) loss[y] = y == prediction ? 0.0 : 1.0;
  return loss;
}

std::vector<double> hamming_loss(std::size_t m, unsigned prediction) {
  check_m(m);
  std::vector<double> loss(states(m));
  for (std::size_t y = 0; y < loss.size(); ++y) {
    loss[y] = static_cast<double>(std::popcount(static_cast<unsigned>(y) ^ prediction));
  }
  return loss;
}

}  // namespace xprop
