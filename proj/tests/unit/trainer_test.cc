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

#include "xprop/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.h"
#include "xprop/datagen.h"
#include "xprop/metrics.h"
#include "xprop/numeric.h"
#include "xprop/rng.h"

namespace xprop {
namespace {

SparseDataset separable(std::size_t n) {
  SparseDataset ds;
  ds.d = 3;
  ds.m = 2;
  Rng rng(5);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t j = static_cast<std::uint32_t>(i % 2);
    ds.features.push_back({{j, 1.0 + 0.1 * rng.uniform()}, {2, 1.0}});
    ds.labels.push_back({j});
  }
  return ds;
}

TrainConfig quick_config() {
  TrainConfig c;
  c.lr_grid = {0.05};
  c.wd_grid = {0.0};
  c.epochs = 15;
  c.batch_size = 32;
  c.patience = 3;
  return c;
}

TEST(TrainerTest, SeparableToyReachesHighPrecision) {
  const auto ds = separable(200);
  const auto result = train_ova(ds, quick_config());
  EXPECT_GE(precision_at_k(ds.labels, predict(result.model, ds), 1).value, 0.95);
  EXPECT_EQ(result.tuning_log.size(), 1u);
  EXPECT_EQ(result.tuning_log[0].status, "ok");
}

TEST(TrainerTest, UnbiasedWithUnitPropensityMatchesVanilla) {
  const auto ds = testing::random_dataset(4, 150, 5, 4);
  auto vanilla = quick_config();
  auto unbiased = vanilla;
  unbiased.loss = LossKind::kUnbiased;
  unbiased.propensities = PropensityAssignment{std::vector<double>(4, 1.0), "one", 0};
  const auto a = train_ova(ds, vanilla).model;
  const auto b = train_ova(ds, unbiased).model;
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(TrainerTest, DeterministicAcrossRunsAndThreadCounts) {
  const auto ds = testing::random_dataset(6, 120, 5, 6);
  auto c = quick_config();
  c.loss = LossKind::kPejlPlug;
  const auto a = train_ova(ds, c).model;
  const auto b = train_ova(ds, c).model;
  c.threads = 3;
  const auto t = train_ova(ds, c).model;
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, t);
  c.seed = 2;
  EXPECT_NE(train_ova(ds, c).model.weights, a.weights);
}

TEST(TrainerTest, GridKeepsTheBestCell) {
  const auto ds = testing::random_dataset(8, 120, 5, 3);
  auto c = quick_config();
  c.lr_grid = {0.001, 0.05};
  c.wd_grid = {0.0, 1e-6};
  const auto r = train_ova(ds, c);
  ASSERT_EQ(r.tuning_log.size(), 4u);
  for (const auto& cell : r.tuning_log) {
    EXPECT_GE(cell.val_objective, r.tuning_log[r.best_cell].val_objective);
  }
  const auto tsv = tuning_log_tsv(r.tuning_log);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "lr\twd\tval_objective\tepochs_ran\tstatus");
}

TEST(TrainerTest, PejlModelsCarryPropensities) {
  const auto ds = testing::random_dataset(9, 100, 4, 3);
  for (auto loss : {LossKind::kPejlPlug, LossKind::kPejlMask}) {
    auto c = quick_config();
    c.loss = loss;
    const auto model = train_ova(ds, c).model;
    const auto p = model.propensities();
    ASSERT_EQ(p.size(), 3u);
    for (double v : p) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(TrainerTest, ConfigValidation) {
  TrainConfig c;
  c.loss = LossKind::kUnbiased;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.lr_grid.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_loss("pejl_mask"), LossKind::kPejlMask);
  EXPECT_EQ(loss_name(LossKind::kUnbiased), "unbiased");
  EXPECT_THROW(parse_loss("hinge"), std::invalid_argument);
  EXPECT_NE(TrainConfig{}.hash(), quick_config().hash());
}

TEST(TrainerTest, AllCellsDivergingIsAnError) {
  const auto ds = separable(50);
  auto c = quick_config();
  c.lr_grid = {std::numeric_limits<double>::infinity()};
  EXPECT_THROW(train_ova(ds, c), std::runtime_error);
}

TEST(PredictTest, ZeroModelScoresOneHalf) {
  LinearOvaModel model;
  model.m = 3;
  model.d = 4;
  model.weights.assign(12, 0.0);
  model.bias.assign(3, 0.0);
  const auto ds = testing::random_dataset(1, 5, 4, 3);
  const auto s = predict(model, ds);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(s.at(i, j), 0.5);
  }
  model.d = 5;
  EXPECT_THROW(predict(model, ds), std::invalid_argument);
}

TEST(PredictTest, SaturatesOnLargeWeight) {
  LinearOvaModel model{1, 1, {40.0}, {0.0}, {}, 0};
  SparseDataset ds;
  ds.d = 1;
  ds.m = 1;
  ds.features = {{{0, 1.0}}, {}};
  ds.labels = {{}, {}};
  const auto s = predict(model, ds);
  EXPECT_GT(s.at(0, 0), 1 - 1e-12);
  EXPECT_EQ(s.at(1, 0), 0.5);
}

TEST(PredictTest, MatchesDenseMatrixProduct) {
  const std::size_t n = 10, d = 8, m = 5;
  const auto ds = testing::random_dataset(3, n, d, m);
  LinearOvaModel model;
  model.m = m;
  model.d = d;
  Rng rng(4);
  for (std::size_t t = 0; t < m * d; ++t) model.weights.push_back(rng.normal());
  for (std::size_t j = 0; j < m; ++j) model.bias.push_back(rng.normal());
  std::vector<double> dense(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& f : ds.features[i]) dense[i * d + f.index] = f.value;
  }
  const auto s = predict(model, ds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      long double z = model.bias[j];
      for (std::size_t t = 0; t < d; ++t) {
        z += static_cast<long double>(dense[i * d + t]) * model.weights[j * d + t];
      }
      EXPECT_NEAR(s.at(i, j), 1.0 / (1.0 + std::exp(-static_cast<double>(z))), 1e-12);
    }
  }
}

TEST(CheckpointTest, RoundTripIsExact) {
  const auto ds = testing::random_dataset(11, 80, 4, 3);
  auto c = quick_config();
  c.loss = LossKind::kPejlPlug;
  const auto model = train_ova(ds, c).model;
  std::stringstream buf;
  save_model(model, buf);
  EXPECT_EQ(load_model(buf), model);
  std::istringstream bad("xprop-ova-model 99\n");
  EXPECT_THROW(load_model(bad), std::runtime_error);
}

TEST(AdamTest, ZeroLearningRateIsIdentity) {
  std::vector<double> w{1.0, -2.0, 3.0};
  const auto before = w;
  Adam adam(3, 0.0, 0.0, {});
  for (int t = 0; t < 5; ++t) adam.step(w, std::vector<double>{0.3, -1.0, 2.0});
  EXPECT_EQ(w, before);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::vector<double> w{0.0, 0.0};
  Adam adam(2, 0.1, 0.0, {});
  adam.step(w, std::vector<double>{2.0, -0.5});
  EXPECT_NEAR(w[0], -0.1, 1e-8);
  EXPECT_NEAR(w[1], 0.1, 1e-7);
}

TEST(AdamTest, WeightDecayPullsTowardZero) {
  std::vector<double> w{1.0};
  Adam adam(1, 0.01, 1.0, {});
  adam.step(w, std::vector<double>{0.0});
  EXPECT_LT(w[0], 1.0);
}

// Small-scale version of the recovery ordering: training with the true
// propensities beats ignoring the bias on clean test data, on average.
TEST(TrainerRecoveryTest, TruePropensitiesBeatUnitOnAverage) {
  double gain = 0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    HyperBallConfig hb;
    hb.m = 10;
    hb.dim = 2;
    hb.r_min = 0.1;
    hb.r_max = 0.6;
    hb.n_train = 2000;
    hb.n_val = 1;
    hb.n_test = 1000;
    hb.seed = static_cast<std::uint64_t>(seed);
    const auto data = generate_hyperball(hb);
    auto truth = assign(PropensityModelSpec::power_law(
                            1.0 / *std::max_element(data.true_priors.priors.begin(),
                                                    data.true_priors.priors.end()),
                            0.5),
                        data.true_priors);
    const auto biased = inject_missing(data.train, truth, 100 + seed);
    auto c = quick_config();
    c.epochs = 30;
    c.patience = 5;
    c.seed = static_cast<std::uint64_t>(seed);
    c.loss = LossKind::kUnbiased;
    c.propensities = PropensityAssignment{std::vector<double>(hb.m, 1.0), "one", 0};
    const double p_unit =
        precision_at_k(data.test.labels, predict(train_ova(biased.data, c).model, data.test), 1).value;
    c.propensities = truth;
    const double p_true =
        precision_at_k(data.test.labels, predict(train_ova(biased.data, c).model, data.test), 1).value;
    gain += p_true - p_unit;
  }
  EXPECT_GE(gain / seeds, 0.0);
}

}  // namespace
}  // namespace xprop
