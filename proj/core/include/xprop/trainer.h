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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xprop/dataset.h"
#include "xprop/metrics.h"
#include "xprop/propensity.h"

namespace xprop {

enum class LossKind { kVanilla, kUnbiased, kPejlPlug, kPejlMask };

std::string_view loss_name(LossKind loss);
LossKind parse_loss(std::string_view name);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  LossKind loss = LossKind::kVanilla;
  // Required for kUnbiased.
  std::optional<PropensityAssignment> propensities;
  std::vector<double> lr_grid{0.005, 0.01, 0.05, 0.1};
  std::vector<double> wd_grid{0.0, 1e-8, 1e-7, 1e-6};
  AdamConfig adam;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::size_t patience = 5;
  double val_fraction = 0.10;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const;
  // Stable digest of every field that affects training.
  std::uint64_t hash() const;
};

// One-vs-all logistic scorer: f_j(x) = sigmoid(w_j . x + bias_j).
struct LinearOvaModel {
  std::size_t m = 0;
  std::size_t d = 0;
  std::vector<double> weights;  // m x d, row-major by label
  std::vector<double> bias;
  // Per-label propensity logits (joint estimation only).
  std::vector<double> prop_logits;
  std::uint64_t config_hash = 0;

  std::span<const double> row(std::size_t j) const {
    return {weights.data() + j * d, d};
  }
  double logit(std::size_t j, const FeatureRow& x) const;
  // sigmoid(prop_logits); empty if the model has none.
  std::vector<double> propensities() const;

  bool operator==(const LinearOvaModel&) const = default;
};

struct TuningCell {
  double lr = 0;
  double wd = 0;
  double val_objective = 0;
  std::size_t epochs_ran = 0;
  std::size_t best_epoch = 0;
  std::string status;  // "ok" or "failed: ..."
};

struct TrainResult {
  LinearOvaModel model;
  std::vector<TuningCell> tuning_log;
  std::size_t best_cell = 0;
};

// Carves config.val_fraction of `train` off for tuning, grid-searches
// learning rate x weight decay with Adam and early stopping on the validation
// loss, and returns the best cell's model. Throws if every cell diverges.
TrainResult train_ova(const SparseDataset& train, const TrainConfig& config);

// One grid cell on explicit train/validation parts.
std::pair<LinearOvaModel, TuningCell> train_cell(const SparseDataset& fit_part,
                                                 const SparseDataset& val_part,
                                                 const TrainConfig& config,
                                                 double lr, double wd);

// Mean per-(instance, label) training loss of `model` on `data`.
double objective(const LinearOvaModel& model, const SparseDataset& data,
                 const TrainConfig& config);

PredictionMatrix predict(const LinearOvaModel& model, const SparseDataset& data);

// Adam with L2 weight decay folded into the gradient.
class Adam {
 public:
  Adam(std::size_t size, double lr, double weight_decay, const AdamConfig& config);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_;
  double wd_;
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// Versioned text checkpoint.
void save_model(const LinearOvaModel& model, std::ostream& out);
LinearOvaModel load_model(std::istream& in);

// Columns: lr, wd, val_objective, epochs_ran, status.
std::string tuning_log_tsv(std::span<const TuningCell> cells);

}  // namespace xprop
