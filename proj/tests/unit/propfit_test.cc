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

#include <gtest/gtest.h>

#include <cmath>

#include "xprop/rng.h"

namespace xprop {
namespace {

std::vector<double> log_uniform_priors(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(m);
  for (auto& v : out) v = std::exp(rng.uniform(std::log(1e-4), std::log(0.5)));
  return out;
}

FitProblem power_problem(std::size_t m, double beta, double gamma, double noise,
                         std::uint64_t seed) {
  FitProblem pb;
  pb.family = PropensityFamily::kPowerLaw;
  pb.priors = log_uniform_priors(m, seed);
  Rng rng = Rng::derive(seed, "noise");
  for (double pi : pb.priors) {
    pb.targets.push_back(clamp_propensity(eval_power(pi, beta, gamma) *
                                          (1 + noise * rng.uniform(-1, 1))));
  }
  return pb;
}

TEST(LmFitTest, RecoversExactPowerLaw) {
  auto pb = power_problem(100, 1.0, 0.3, 0.0, 3);
  const auto r = lm_fit(pb, std::vector<double>{1.0, 1.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.params[1], 0.3, 1e-2);
  EXPECT_NEAR(r.params[0], 1.0, 1e-2);
}

TEST(LmFitTest, ConstantFamilyPerfectFit) {
  FitProblem pb;
  pb.family = PropensityFamily::kConstant;
  pb.priors = log_uniform_priors(10, 1);
  pb.targets.assign(10, 1.0);
  pb.zero_weight_boundary = false;
  const auto r = lm_fit(pb, std::vector<double>{0.5});
  EXPECT_NEAR(r.params[0], 1.0, 1e-8);
  EXPECT_NEAR(r.mse, 0.0, 1e-12);
}

TEST(LmFitTest, TinyNJpvFitIsFlagged) {
  FitProblem pb;
  pb.family = PropensityFamily::kJpv;
  pb.priors = log_uniform_priors(50, 9);
  for (double pi : pb.priors) pb.targets.push_back(std::min(1.0, 0.2 + pi));
  pb.n = 2.0;
  pb.free_mask = {true, true, false};
  const auto r = fit_family(pb);
  EXPECT_TRUE(!r.converged || r.degenerate);
}

TEST(LmFitTest, ObjectiveHistoryNeverIncreases) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto pb = power_problem(200, 0.8, 0.4, 0.05, seed);
    const auto r = lm_fit(pb, std::vector<double>{2.0, 1.0});
    ASSERT_FALSE(r.objective_history.empty());
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      EXPECT_LE(r.objective_history[i], r.objective_history[i - 1]);
    }
  }
}

TEST(LmFitTest, NoisyTargetsRecoverParametersWithinFivePercent) {
  auto pb = power_problem(200, 1.0, 0.3, 0.01, 17);
  const auto r = fit_family(pb);
  EXPECT_NEAR(r.params[0], 1.0, 0.05);
  EXPECT_NEAR(r.params[1], 0.3, 0.05 * 0.3);

  FitProblem jp;
  jp.family = PropensityFamily::kJpv;
  jp.n = 1e5;
  jp.priors = log_uniform_priors(200, 18);
  Rng rng(19);
  for (double pi : jp.priors) {
    jp.targets.push_back(
        clamp_propensity(eval_jpv(pi, jp.n, 0.55, 1.5).value * (1 + 0.01 * rng.uniform(-1, 1))));
  }
  jp.free_mask = {true, true, false};
  const auto rj = fit_family(jp);
  EXPECT_NEAR(rj.params[0], 0.55, 0.05 * 0.55);
  EXPECT_NEAR(rj.params[1], 1.5, 0.05 * 1.5);
}

TEST(LmFitTest, ConvergedFitNeverWorseThanItsStart) {
  auto pb = power_problem(200, 0.5, 0.6, 0.1, 23);
  const std::vector<double> init{1.0, 1.0};
  const auto r = lm_fit(pb, init);
  ASSERT_TRUE(r.converged);
  const LabelPriors priors{1000, 0, {}, pb.priors};
  EXPECT_LE(fit_mse(assign(r.spec(pb.family), priors), pb.targets),
            fit_mse(assign(PropensityModelSpec::power_law(1, 1), priors), pb.targets));
}

TEST(LmFitTest, RejectsBadInput) {
  FitProblem pb;
  EXPECT_THROW(pb.validate(), std::invalid_argument);
  pb = power_problem(10, 1, 1, 0, 1);
  EXPECT_THROW(lm_fit(pb, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(lm_fit(pb, std::vector<double>{-1.0, 1.0}), std::domain_error);
}

TEST(FitMseTest, Examples) {
  const std::vector<double> t{0.2, 0.4, 0.9};
  EXPECT_EQ(fit_mse(t, t), 0.0);
  EXPECT_DOUBLE_EQ(fit_mse(std::vector<double>(3, 0.5), std::vector<double>(3, 0.25)), 4.0);
  EXPECT_THROW(fit_mse(t, std::vector<double>{1.0}), std::invalid_argument);
}

}  // namespace
}  // namespace xprop
