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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xprop/dataset.h"

namespace xprop {

// Every evaluated propensity is clamped into [kMinPropensity, 1] so inverse
// propensities stay finite.
inline constexpr double kMinPropensity = 1e-6;

double clamp_propensity(double p);

struct JpvValue {
  double value = 1.0;
  // Set when n < 3 (log n - 1 <= 0) or the raw value left (0, 1].
  bool degenerate = false;
};

// Empirical JPV propensity model:
//   p = 1 / (1 + (ln n - 1) (b + 1)^a (n prior + b)^-a)
// Requires n >= 1 and n * prior + b > 0; throws std::domain_error otherwise.
JpvValue eval_jpv(double prior, double n, double a, double b);

// (beta * prior)^gamma, clamped. Requires beta * prior > 0 and gamma >= 0.
double eval_power(double prior, double beta, double gamma);

struct RichardsParams {
  double c = 0, d = 1, e = 1, f = 1, g = 1, h = 1;
};

// Generalized logistic: c + (d - c) / (e + f exp(-g prior))^(1/h), clamped.
// Requires a positive base and h != 0.
double eval_richards(double prior, const RichardsParams& params);

enum class PropensityFamily { kConstant, kJpv, kPowerLaw, kRichards, kDirectTable };

std::string_view family_name(PropensityFamily family);
PropensityFamily parse_family(std::string_view name);

// Parameter layout per family:
//   constant:  p
//   jpv:       a, b, n   (n <= 0 means "use the prior source's n")
//   power:     beta, gamma
//   richards:  c, d, e, f, g, h
//   direct:    one propensity per label
struct PropensityModelSpec {
  PropensityFamily family = PropensityFamily::kConstant;
  std::vector<double> params{1.0};

  static PropensityModelSpec constant(double p);
  static PropensityModelSpec jpv(double a, double b, double n = 0);
  static PropensityModelSpec power_law(double beta, double gamma);
  static PropensityModelSpec richards(const RichardsParams& r);
  static PropensityModelSpec direct_table(std::vector<double> table);

  // Commonly used settings from the literature.
  static PropensityModelSpec jpv_default() { return jpv(0.55, 1.5); }
  static PropensityModelSpec jpv_wikipedia() { return jpv(0.5, 0.4); }
  static PropensityModelSpec jpv_amazon() { return jpv(0.6, 2.6); }

  bool operator==(const PropensityModelSpec&) const = default;
};

std::vector<std::string> parameter_names(PropensityFamily family);

// Flat key-value form, one "key = value" per line:
//   family = power
//   beta = 1
//   gamma = 0.3
// Direct tables use "table = p0,p1,...".
std::string to_kv(const PropensityModelSpec& spec);
PropensityModelSpec spec_from_kv(const std::map<std::string, std::string>& kv);

// Unclamped family value, or nullopt when the parameters leave the family's
// domain at this prior. `n` is only used by JPV.
std::optional<double> evaluate_unclamped(PropensityFamily family,
                                         std::span<const double> params,
                                         double prior, double n);

struct PropensityAssignment {
  std::vector<double> p;
  std::string source;
  // Labels whose value came from a degenerate regime (JPV out of codomain).
  std::size_t degenerate_labels = 0;

  std::size_t m() const { return p.size(); }
  std::vector<double> inverse() const;
};

PropensityAssignment assign(const PropensityModelSpec& spec,
                            const LabelPriors& priors);

// Training-set propensities from a bias-controlled validation set:
//   p_j = prior_train_j * p_controlled_j / prior_val_j, clamped.
PropensityAssignment direct_estimate(const LabelPriors& train,
                                     const LabelPriors& val,
                                     std::span<const double> p_controlled);
PropensityAssignment direct_estimate(const LabelPriors& train,
                                     const LabelPriors& val,
                                     double p_controlled);

// Clean-label probability from the observed one: min(eta_observed / p, 1).
double adjust_probability(double eta_observed, double p);

struct ScalingPoint {
  double n = 0;
  double p = 0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  // Index from which the sequence is non-decreasing to the end.
  std::size_t increasing_from = 0;
  bool eventually_increasing = false;
  double terminal = 0;
};

// Propensity of one label at a fixed prior as the dataset grows.
ScalingReport scaling_diagnostic(double a, double b, double prior,
                                 std::span<const double> n_grid);
// Same for any family; n only enters JPV.
ScalingReport scaling_diagnostic(const PropensityModelSpec& spec, double prior,
                                 std::span<const double> n_grid);

}  // namespace xprop
