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
#include <optional>
#include <string>
#include <vector>

#include "xprop/config.h"
#include "xprop/datagen.h"
#include "xprop/dataset.h"
#include "xprop/metrics.h"
#include "xprop/propensity.h"
#include "xprop/propfit.h"
#include "xprop/report.h"
#include "xprop/trainer.h"

namespace xprop {

// ---- Config sections -------------------------------------------------------

// [data] m, dim, r_min, r_max, n_train, n_val, n_test, squared_norm_feature.
HyperBallConfig hyperball_from_config(const Config& config, const std::string& section = "data");
// [train] loss, lr_grid, wd_grid, epochs, batch_size, patience, val_fraction,
// beta1, beta2, eps.
TrainConfig train_from_config(const Config& config, const std::string& section = "train");
// "seeds" (top level); must be non-empty.
std::vector<std::uint64_t> seeds_from_config(const Config& config);
// k values from "metrics.k", default 1,3,5.
std::vector<std::size_t> ks_from_config(const Config& config);

// A propensity model that may take beta = 1 / max prior from the data, which
// the section requests with "beta = auto".
struct NamedPropensityModel {
  std::string name;
  PropensityModelSpec spec;
  bool beta_from_max_prior = false;

  PropensityAssignment resolve(const LabelPriors& priors) const;
};
NamedPropensityModel propensity_from_config(const Config& config, const std::string& section);

// ---- Metrics --------------------------------------------------------------

// P, R, nDCG, Abandonment and Coverage at each k on `labels`; with
// propensities also PSP, PSR, PSnDCG and nPSP.
std::vector<MetricValue> evaluate_all(const LabelRows& labels, const PredictionMatrix& scores,
                                      std::span<const std::size_t> ks,
                                      const PropensityAssignment* propensities = nullptr);
// Appends a "metrics" table (metric, k, value, n_evaluated, skipped, split).
void add_metric_rows(ExperimentReport& report, const std::string& seed,
                     const std::string& split, std::span<const MetricValue> values);

// ---- Statistics -----------------------------------------------------------

// Imbalance statistics and the label frequency series of a dataset.
// `seed` labels the rows, "-" for data not produced from a seed.
ExperimentReport stats_report(const SparseDataset& data, std::uint64_t config_hash,
                              const std::string& seed = "-");

// ---- Mismatch (noise model x training model) -------------------------------

struct MismatchConfig {
  HyperBallConfig data;
  std::vector<NamedPropensityModel> models;
  TrainConfig train;
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
  std::uint64_t config_hash = 0;

  static MismatchConfig from_config(const Config& config);
};

struct MismatchCell {
  std::uint64_t seed = 0;
  std::size_t noise = 0;
  std::size_t train = 0;
  double p_at_1 = 0, p_at_3 = 0, p_at_5 = 0;
  std::vector<double> psp_at_1;  // one per model, on the biased test set
};

struct MismatchResult {
  std::vector<std::string> model_names;
  std::vector<MismatchCell> cells;  // seed-major, then noise, then train
  ExperimentReport report;

  // Share of seeds in which the model matched to `noise` has the best clean P@1.
  double matched_p1_rate(std::size_t noise) const;
  // Share of seeds in which, on data biased by `noise`, PSP@1 under model
  // `variant` is highest for the model trained with `variant`.
  double own_psp_rate(std::size_t noise, std::size_t variant) const;
};

// For each seed and every (noise model, training model) pair: bias the
// training and test sets with the noise model, train with the unbiased loss
// under the training model, report clean P@{1,3,5} and biased PSP@1 under
// every model.
MismatchResult run_mismatch_experiment(const MismatchConfig& config);

// ---- Propensity recovery ---------------------------------------------------

struct RecoveryConfig {
  HyperBallConfig data;
  NamedPropensityModel noise;
  double p_controlled = 0.5;
  // Labels need this many positives in the biased train and the controlled
  // validation set to get a direct estimate.
  std::size_t min_positives = 5;
  std::vector<PropensityFamily> families{PropensityFamily::kJpv, PropensityFamily::kPowerLaw,
                                         PropensityFamily::kRichards};
  std::uint64_t seed = 1;
  std::uint64_t config_hash = 0;

  static RecoveryConfig from_config(const Config& config);
};

struct FamilyFit {
  PropensityFamily family;
  FitResult fit;
  double mse_fitted = 0;
  std::optional<double> mse_default;
};

struct RecoveryResult {
  std::vector<std::uint32_t> labels;  // labels with a direct estimate
  std::vector<double> observed_prior;
  std::vector<double> direct;
  std::vector<double> sigma;  // delta-method standard error of `direct`
  std::vector<double> true_p;
  std::vector<FamilyFit> fits;  // ordered by mse_fitted
  double within_3_sigma = 0;
  ExperimentReport report;
};

// Direct estimates from a biased train set and a bias-controlled validation
// set, followed by a fit of every family to them.
RecoveryResult run_propensity_recovery(const RecoveryConfig& config);

// Fits each family to (priors, targets) and computes the MSE table rows.
std::vector<FamilyFit> fit_families(std::span<const PropensityFamily> families,
                                    std::span<const double> priors,
                                    std::span<const double> targets, double n);

// ---- Feasibility -----------------------------------------------------------

ExperimentReport run_feasibility_demo(std::uint64_t config_hash = 0);

// ---- Pipeline --------------------------------------------------------------

struct PipelineConfig {
  HyperBallConfig data;
  NamedPropensityModel noise;
  TrainConfig train;
  std::vector<std::size_t> ks{1, 3, 5};
  std::uint64_t seed = 1;
  std::uint64_t config_hash = 0;

  static PipelineConfig from_config(const Config& config);
};

// Generate, inject, train, evaluate. The report holds the tuning log and the
// metrics on the clean and the biased test set.
ExperimentReport run_pipeline(const PipelineConfig& config);

}  // namespace xprop
