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

#include <algorithm>
#include <cmath>

namespace xprop {

// Probabilities are clamped into [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-12;

inline double clamp_prob(double q) {
  return std::clamp(q, kProbEps, 1.0 - kProbEps);
}

struct LossGrad {
  double value = 0;
  double d_score = 0;       // d/df (classifier output)
  double d_propensity = 0;  // d/dp or d/dphi (propensity), where it applies
};

// Logistic loss on the observed label.
inline LossGrad loss_vanilla(double y, double f) {
  f = clamp_prob(f);
  return {-y * std::log(f) - (1 - y) * std::log(1 - f),
          -y / f + (1 - y) / (1 - f), 0.0};
}

// Unbiased logistic loss: coefficients y/p and 1 - y/p. The second one is
// negative for an observed positive with p < 1; that is what makes the
// expectation over the missing-label process equal the clean loss.
inline LossGrad loss_unbiased(double y, double p, double f) {
  f = clamp_prob(f);
  const double c = y / p;
  return {-c * std::log(f) - (1 - c) * std::log(1 - f),
          -c / f + (1 - c) / (1 - f), 0.0};
}

// Joint estimation loss: logistic loss of the observed label against p * f.
inline LossGrad loss_pejl_plug(double y, double p, double f) {
  const double q = clamp_prob(p * f);
  const double dq = -y / q + (1 - y) / (1 - q);
  return {-y * std::log(q) - (1 - y) * std::log(1 - q), dq * p, dq * f};
}

// Mask-model loss for the propensity phi given a frozen estimate eta_hat of
// the clean conditional probability. Gradient is with respect to phi.
inline LossGrad loss_pejl_mask(double y, double eta_hat, double phi) {
  eta_hat = std::clamp(eta_hat, kProbEps, 1.0);
  phi = clamp_prob(phi);
  const double c = y / eta_hat;
  return {-c * std::log(phi) - (1 - c) * std::log(1 - phi), 0.0,
          -c / phi + (1 - c) / (1 - phi)};
}

// Gradients with respect to the logit z of f = sigmoid(z), in closed form.
// They equal d_score * f (1 - f) of the losses above away from the clamps.
inline double logit_grad_unbiased(double y, double p, double f) {
  return f - y / p;
}

struct PlugLogitGrad {
  double d_logit = 0;             // w.r.t. z, f = sigmoid(z)
  double d_propensity_logit = 0;  // w.r.t. p', p = sigmoid(p')
};

inline PlugLogitGrad logit_grad_pejl_plug(double y, double p, double f) {
  const double q = p * f;
  const double one_minus_q = std::max(1 - q, kProbEps);
  return {(q - y) * (1 - f) / one_minus_q, (q - y) * (1 - p) / one_minus_q};
}

inline double logit_grad_pejl_mask(double y, double eta_hat, double phi) {
  eta_hat = std::clamp(eta_hat, kProbEps, 1.0);
  return phi - y / eta_hat;
}

}  // namespace xprop
