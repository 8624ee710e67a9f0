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

// Acceptance runner. Prints one PASS/FAIL line per criterion.
//
//   xprop_acceptance               run every criterion
//   xprop_acceptance --criterion N run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracle.h"
#include "test_util.h"
#include "xprop/config.h"
#include "xprop/datagen.h"
#include "xprop/experiments.h"
#include "xprop/feasibility.h"
#include "xprop/losses.h"
#include "xprop/metrics.h"
#include "xprop/numeric.h"
#include "xprop/propensity.h"
#include "xprop/propfit.h"
#include "xprop/rng.h"
#include "xprop/trainer.h"

#ifndef XPROP_CONFIG_DIR
#error "XPROP_CONFIG_DIR must point at the configs/ directory"
#endif

namespace xprop::acceptance {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

// Mean PSP@k with the true propensities over repeated noise draws versus the
// clean P@k of a fixed random linear classifier.
Outcome unbiasedness() {
  HyperBallConfig hb;
  hb.m = 100;
  hb.dim = 4;
  hb.n_train = 1;
  hb.n_val = 1;
  hb.n_test = 5000;
  hb.seed = 2024;
  const auto data = generate_hyperball(hb);
  // A fixed linear scorer on (x, |x|^2): the ball-membership margin of every
  // label with random perturbations of its weights.
  Rng rng = Rng::derive(99, "acceptance/classifier");
  PredictionMatrix scores(data.test.n(), hb.m);
  std::vector<double> w(hb.m * (hb.dim + 1)), bias(hb.m);
  for (std::size_t j = 0; j < hb.m; ++j) {
    const double r2 = data.radii[j] * data.radii[j];
    double c2 = 0;
    for (std::size_t t = 0; t < hb.dim; ++t) {
      w[j * (hb.dim + 1) + t] = 2 * data.centers[j][t] / r2 + rng.normal();
      c2 += data.centers[j][t] * data.centers[j][t];
    }
    w[j * (hb.dim + 1) + hb.dim] = -1 / r2 + rng.normal();
    bias[j] = 1 - c2 / r2 + rng.normal();
  }
  for (std::size_t i = 0; i < data.test.n(); ++i) {
    for (std::size_t j = 0; j < hb.m; ++j) {
      double z = bias[j];
      for (const auto& f : data.test.features[i]) z += w[j * (hb.dim + 1) + f.index] * f.value;
      scores.at(i, j) = z;
    }
  }
  const auto p = assign(PropensityModelSpec::jpv(0.55, 1.5, 10000), data.true_priors);
  constexpr int kDraws = 200;
  const std::vector<std::size_t> ks{1, 3, 5};
  std::vector<std::vector<double>> draws(ks.size());
  for (int r = 0; r < kDraws; ++r) {
    const auto biased = inject_missing(data.test, p, 5000 + static_cast<std::uint64_t>(r));
    for (std::size_t t = 0; t < ks.size(); ++t) {
      draws[t].push_back(ps_precision_at_k(biased.data.labels, scores, ks[t], p).value);
    }
  }
  Outcome out{true, ""};
  for (std::size_t t = 0; t < ks.size(); ++t) {
    const double clean = precision_at_k(data.test.labels, scores, ks[t]).value;
    const double m = mean(draws[t]);
    const double se = bootstrap_standard_error(draws[t], 2000, 17);
    const bool ok = std::abs(m - clean) <= 3 * se;
    out.pass &= ok;
    out.detail += fmt::format("k={} P={:.5f} meanPSP={:.5f} 3se={:.5f}; ", ks[t], clean, m, 3 * se);
  }
  return out;
}

Outcome normalized_psp_contrast() {
  const LabelRows observed{{0}, {1, 2}};
  PredictionMatrix scores(2, 3);
  scores.at(0, 0) = 1.0;
  scores.at(1, 1) = 1.0;
  const PropensityAssignment p{{0.25, 0.5, 0.9}, "constructed", 0};
  const double psp = ps_precision_at_k(observed, scores, 1, p).value;
  const double npsp = normalized_psp_at_k(observed, scores, 1, p).value;
  return {psp > 1.5 && npsp <= 1.0, fmt::format("PSP@1={} nPSP@1={}", psp, npsp)};
}

Outcome jpv_scaling() {
  const std::vector<std::pair<double, double>> params{{0.5, 0.4}, {0.55, 1.5}, {0.6, 2.6}};
  Outcome out{true, ""};
  for (auto [a, b] : params) {
    const double p3 = eval_jpv(0.01, 1e3, a, b).value;
    const double p6 = eval_jpv(0.01, 1e6, a, b).value;
    const double p9 = eval_jpv(0.01, 1e9, a, b).value;
    const bool ok = p3 < p6 && p6 < p9 && p9 >= 0.999;
    out.pass &= ok;
    out.detail += fmt::format("(a={},b={}) {:.6f} < {:.6f} < {:.6f}{}; ", a, b, p3, p6, p9,
                              p9 >= 0.999 ? "" : " [n=1e9 below 0.999]");
  }
  return out;
}

Outcome feasibility() {
  const auto loss = subset_zero_one_loss(2, 0);
  const auto correlated = check_unbiased_estimator_exists(
      2, {joint_missing_masks(0.5), complementary_missing_masks()}, loss);
  const std::vector<double> half{0.5, 0.5};
  const auto independent = check_unbiased_estimator_exists(2, {independent_masks(half)}, loss);
  return {correlated.residual > 1e-6 && !correlated.feasible && independent.feasible &&
              independent.residual <= 1e-9,
          fmt::format("correlated residual={:.4g} independent residual={:.3g}",
                      correlated.residual, independent.residual)};
}

Outcome lm_recovery() {
  Rng rng(505);
  std::vector<double> priors, targets;
  for (int j = 0; j < 200; ++j) {
    const double pi = std::exp(rng.uniform(std::log(1e-4), std::log(0.3)));
    priors.push_back(pi);
    targets.push_back(clamp_propensity(eval_power(pi, 1.0, 0.3) * (1 + 0.01 * rng.uniform(-1, 1))));
  }
  const std::vector<PropensityFamily> families{PropensityFamily::kPowerLaw,
                                               PropensityFamily::kJpv};
  const auto fits = fit_families(families, priors, targets, 1e5);
  double gamma = NAN, power_mse = NAN, jpv_default = NAN;
  for (const auto& f : fits) {
    if (f.family == PropensityFamily::kPowerLaw) {
      gamma = f.fit.params[1];
      power_mse = f.mse_fitted;
    } else if (f.mse_default) {
      jpv_default = *f.mse_default;
    }
  }
  return {std::abs(gamma - 0.3) <= 0.02 && power_mse < jpv_default,
          fmt::format("gamma={:.5f} mse(power fitted)={:.4g} mse(jpv default)={:.4g}", gamma,
                      power_mse, jpv_default)};
}

Outcome unbiased_expectation() {
  double worst = 0;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      const double p = 0.1 + 0.09 * a;
      const double f = 0.05 + 0.1 * b;
      const double e1 = p * loss_unbiased(1, p, f).value + (1 - p) * loss_unbiased(0, p, f).value;
      worst = std::max(worst, std::abs(e1 - loss_vanilla(1, f).value));
      worst = std::max(worst, std::abs(loss_unbiased(0, p, f).value - loss_vanilla(0, f).value));
    }
  }
  return {worst <= 1e-12, fmt::format("max abs error={:.3g}", worst)};
}

Outcome gradient_checks() {
  Rng rng(77);
  double worst = 0;
  auto check = [&](double analytic, const std::function<double(double)>& fn, double x) {
    const double h = 1e-6;
    const double numeric = (fn(x + h) - fn(x - h)) / (2 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1.0});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  for (int t = 0; t < 20; ++t) {
    const double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double p = rng.uniform(0.1, 0.95);
    const double f = rng.uniform(0.05, 0.95);
    check(loss_vanilla(y, f).d_score, [&](double x) { return loss_vanilla(y, x).value; }, f);
    check(loss_unbiased(y, p, f).d_score, [&](double x) { return loss_unbiased(y, p, x).value; },
          f);
    check(loss_pejl_plug(y, p, f).d_score,
          [&](double x) { return loss_pejl_plug(y, p, x).value; }, f);
    check(loss_pejl_plug(y, p, f).d_propensity,
          [&](double x) { return loss_pejl_plug(y, x, f).value; }, p);
    check(loss_pejl_mask(y, f, p).d_propensity,
          [&](double x) { return loss_pejl_mask(y, f, x).value; }, p);
  }
  return {worst <= 1e-6, fmt::format("max relative error={:.3g}", worst)};
}

Outcome mismatch() {
  const auto config = Config::load(std::string(XPROP_CONFIG_DIR) + "/mismatch.ini");
  auto mc = MismatchConfig::from_config(config);
  const auto result = run_mismatch_experiment(mc);
  const std::size_t k = result.model_names.size();
  Outcome out{mc.seeds.size() >= 20, fmt::format("seeds={}; ", mc.seeds.size())};
  for (std::size_t noise = 0; noise < k; ++noise) {
    const double p1 = result.matched_p1_rate(noise);
    out.pass &= p1 >= 0.6;
    out.detail += fmt::format("noise={} matched P@1 best {:.0f}%", result.model_names[noise],
                              100 * p1);
    for (std::size_t v = 0; v < k; ++v) {
      const double own = result.own_psp_rate(noise, v);
      out.pass &= own >= 0.7;
      out.detail += fmt::format(", PSP[{}] own best {:.0f}%", result.model_names[v], 100 * own);
    }
    out.detail += "; ";
  }
  return out;
}

Outcome pejl_trend() {
  constexpr int kSeeds = 10;
  int good = 0;
  std::string detail;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    HyperBallConfig hb;
    hb.m = 30;
    hb.dim = 2;
    // Balls small relative to the sharpness a linear scorer reaches in a few
    // hundred epochs let p and f trade off freely; keep radii moderate.
    hb.r_min = 0.3;
    hb.r_max = 0.5;
    hb.n_train = 10000;
    hb.n_val = 1;
    hb.n_test = 1;
    hb.seed = static_cast<std::uint64_t>(seed);
    const auto data = generate_hyperball(hb);
    Rng rng = Rng::derive(static_cast<std::uint64_t>(seed), "acceptance/pejl-truth");
    std::vector<double> truth(hb.m);
    for (auto& v : truth) v = rng.uniform(0.2, 1.0);
    const auto biased = inject_missing(
        data.train, assign(PropensityModelSpec::direct_table(truth), data.true_priors),
        static_cast<std::uint64_t>(seed) + 1000);
    TrainConfig tc;
    tc.loss = LossKind::kPejlPlug;
    tc.lr_grid = {0.05};
    tc.wd_grid = {0.0};
    tc.epochs = 200;
    tc.patience = 20;
    tc.seed = static_cast<std::uint64_t>(seed);
    const auto model = train_ova(biased.data, tc).model;
    const auto estimated = model.propensities();
    const auto counts = label_counts(data.train);
    std::vector<double> x, y;
    for (std::size_t j = 0; j < hb.m; ++j) {
      if (counts[j] >= 50) {
        x.push_back(estimated[j]);
        y.push_back(truth[j]);
      }
    }
    const double rho = x.size() >= 3 ? spearman(x, y) : NAN;
    good += rho > 0.5;
    detail += fmt::format("{:.2f} ", rho);
  }
  return {good >= 8, fmt::format("seeds with rho>0.5: {}/{}; rho: {}", good, kSeeds, detail)};
}

Outcome oracle_equivalence() {
  Rng rng(1010);
  SparseDataset ds = testing::random_dataset(1011, 50, 4, 6);
  PredictionMatrix scores(50, 6);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 6; ++j) scores.at(i, j) = static_cast<double>(rng.below(5));
  }
  std::vector<double> p(6), w(6);
  for (auto& v : p) v = rng.uniform(0.05, 1.0);
  for (auto& v : w) v = rng.uniform(0.0, 2.0);
  double worst = 0;
  std::size_t compared = 0;
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto expected = oracle::all_metrics(ds.labels, scores, k, p, w, 1.0);
    const auto actual = oracle::library_metrics(ds.labels, scores, k, p, w, 1.0);
    for (const auto& [name, v] : expected) {
      worst = std::max(worst, std::abs(actual.at(name) - v));
      ++compared;
    }
  }
  return {worst <= 1e-12 && compared > 0,
          fmt::format("{} metric values compared, max abs difference={:.3g}", compared, worst)};
}

Outcome determinism() {
  const auto config = Config::load(std::string(XPROP_CONFIG_DIR) + "/pipeline.ini");
  const auto pc = PipelineConfig::from_config(config);
  const auto first = run_pipeline(pc).to_tsv();
  const auto second = run_pipeline(pc).to_tsv();
  return {first == second && !first.empty(),
          fmt::format("report bytes={} identical={}", first.size(), first == second)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "PSP unbiasedness over 200 noise draws", 120, unbiasedness},
      {2, "unnormalized PSP above 1.5 with normalized PSP at most 1", 1, normalized_psp_contrast},
      {3, "JPV propensity tends to 1 as n grows", 1, jpv_scaling},
      {4, "unbiased estimator feasibility", 1, feasibility},
      {5, "LM recovery of a power-law exponent", 5, lm_recovery},
      {6, "unbiased loss expectation identity", 1, unbiased_expectation},
      {7, "loss gradient checks", 1, gradient_checks},
      {8, "propensity mismatch experiment", 600, mismatch},
      {9, "joint propensity estimates follow the truth", 300, pejl_trend},
      {10, "metrics equal brute-force recomputation", 10, oracle_equivalence},
      {11, "pipeline determinism", 300, determinism},
  };
  return all;
}

}  // namespace
}  // namespace xprop::acceptance

int main(int argc, char** argv) {
  using xprop::acceptance::criteria;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    xprop::acceptance::Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    failed += !pass;
    fmt::print("criterion {:2d} {} {} ({:.2f}s of {:.0f}s{}) {}\n", c.id, pass ? "PASS" : "FAIL",
               c.name, seconds, c.budget_seconds, in_budget ? "" : ", over budget",
               outcome.detail);
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
