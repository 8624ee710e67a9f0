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

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xprop/losses.h"
#include "xprop/numeric.h"
#include "xprop/parallel.h"
#include "xprop/rng.h"

namespace xprop {

std::string_view loss_name(LossKind loss) {
  switch (loss) {
    case LossKind::kVanilla: return "vanilla";
    case LossKind::kUnbiased: return "unbiased";
    case LossKind::kPejlPlug: return "pejl_plug";
    case LossKind::kPejlMask: return "pejl_mask";
  }
  return "?";
}

LossKind parse_loss(std::string_view name) {
  for (auto l : {LossKind::kVanilla, LossKind::kUnbiased, LossKind::kPejlPlug,
                 LossKind::kPejlMask}) {
    if (loss_name(l) == name) return l;
  }
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (lr_grid.empty() || wd_grid.empty()) {
    throw std::invalid_argument("train config: empty hyperparameter grid");
  }
  if (!(val_fraction > 0.0 && val_fraction < 0.5)) {
    throw std::invalid_argument("train config: val_fraction must be in (0, 0.5)");
  }
  if (epochs < 1 || batch_size < 1 || patience < 1) {
    throw std::invalid_argument("train config: epochs, batch_size and patience must be >= 1");
  }
  if (loss == LossKind::kUnbiased && !propensities) {
    throw std::invalid_argument("train config: the unbiased loss needs propensities");
  }
}

std::uint64_t TrainConfig::hash() const {
  std::ostringstream s;
  s << loss_name(loss) << '|';
  for (double v : lr_grid) s << format_double(v) << ',';
  s << '|';
  for (double v : wd_grid) s << format_double(v) << ',';
  s << '|' << format_double(adam.beta1) << ',' << format_double(adam.beta2)
    << ',' << format_double(adam.eps) << '|' << epochs << '|' << batch_size
    << '|' << patience << '|' << format_double(val_fraction) << '|' << seed;
  if (propensities) {
    s << "|p:";
    for (double v : propensities->p) s << format_double(v) << ',';
  }
  return fnv1a64(s.str());
}

double LinearOvaModel::logit(std::size_t j, const FeatureRow& x) const {
  const double* w = weights.data() + j * d;
  double z = bias[j];
  for (const auto& f : x) z += w[f.index] * f.value;
  return z;
}

std::vector<double> LinearOvaModel::propensities() const {
  std::vector<double> p(prop_logits.size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = sigmoid(prop_logits[j]);
  return p;
}

Adam::Adam(std::size_t size, double lr, double weight_decay,
           const AdamConfig& config)
    : lr_(lr), wd_(weight_decay), config_(config), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] + wd_ * params[i];
    m_[i] = config_.beta1 * m_[i] + (1 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1 - config_.beta2) * g * g;
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

namespace {

// Row-compressed copy of the features and a dense 0/1 label matrix.
struct Packed {
  std::size_t n = 0, m = 0, d = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> index;
  std::vector<double> value;
  std::vector<std::uint8_t> y;  // n x m

  explicit Packed(const SparseDataset& ds) : n(ds.n()), m(ds.m), d(ds.d), y(ds.n() * ds.m, 0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& f : ds.features[i]) {
        index.push_back(f.index);
        value.push_back(f.value);
      }
      offsets.push_back(index.size());
      for (auto j : ds.labels[i]) y[i * m + j] = 1;
    }
  }

  double dot(std::size_t i, const double* w) const {
    double z = 0;
    for (std::size_t t = offsets[i]; t < offsets[i + 1]; ++t) z += w[index[t]] * value[t];
    return z;
  }
};

// Parameters and optimizer state of one label. theta = [w (d), bias].
struct LabelState {
  std::vector<double> theta;
  double prop_logit = 0;
  Adam adam_theta;
  Adam adam_prop;

  LabelState(std::size_t d, double lr, double wd, const AdamConfig& cfg)
      : theta(d + 1, 0.0), adam_theta(d + 1, lr, wd, cfg), adam_prop(1, lr, wd, cfg) {}
};

bool uses_prop_logits(LossKind loss) {
  return loss == LossKind::kPejlPlug || loss == LossKind::kPejlMask;
}

double label_val_loss(const Packed& val, std::size_t j, const LabelState& s,
                      LossKind loss, double p_fixed) {
  const std::size_t d = val.d;
  const double* w = s.theta.data();
  const double p = uses_prop_logits(loss) ? sigmoid(s.prop_logit) : p_fixed;
  double total = 0;
  for (std::size_t i = 0; i < val.n; ++i) {
    const double f = sigmoid(val.dot(i, w) + w[d]);
    const double y = val.y[i * val.m + j];
    switch (loss) {
      case LossKind::kVanilla: total += loss_vanilla(y, f).value; break;
      case LossKind::kUnbiased: total += loss_unbiased(y, p, f).value; break;
      case LossKind::kPejlPlug:
      case LossKind::kPejlMask: total += loss_pejl_plug(y, p, f).value; break;
    }
  }
  return total;
}

enum class Phase { kJoint, kClassifier, kPropensity };

// One pass of mini-batch updates for label j over `rows` (already shuffled).
void run_label_epoch(const Packed& data, std::span<const std::size_t> rows,
                     std::size_t batch_size, std::size_t j, LabelState& s,
                     LossKind loss, double p_fixed, Phase phase,
                     std::vector<double>& grad) {
  const std::size_t d = data.d;
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t end = std::min(rows.size(), start + batch_size);
    const double inv_b = 1.0 / static_cast<double>(end - start);
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_prop = 0;
    const double p = uses_prop_logits(loss) ? sigmoid(s.prop_logit) : p_fixed;
    const double* w = s.theta.data();
    for (std::size_t r = start; r < end; ++r) {
      const std::size_t i = rows[r];
      const double f = sigmoid(data.dot(i, w) + w[d]);
      const double y = data.y[i * data.m + j];
      double g = 0;
      switch (loss) {
        case LossKind::kVanilla: g = f - y; break;
        case LossKind::kUnbiased: g = logit_grad_unbiased(y, p, f); break;
        case LossKind::kPejlPlug: {
          const auto pg = logit_grad_pejl_plug(y, p, f);
          g = pg.d_logit;
          grad_prop += pg.d_propensity_logit;
          break;
        }
        case LossKind::kPejlMask:
          if (phase == Phase::kClassifier) {
            g = logit_grad_unbiased(y, p, f);
          } else {
            grad_prop += logit_grad_pejl_mask(y, f, p);
          }
          break;
      }
      if (g != 0.0) {
        for (std::size_t t = data.offsets[i]; t < data.offsets[i + 1]; ++t) {
          grad[data.index[t]] += g * data.value[t];
        }
        grad[d] += g;
      }
    }
    if (phase != Phase::kPropensity) {
      for (auto& v : grad) v *= inv_b;
      s.adam_theta.step(s.theta, grad);
    }
    if (phase != Phase::kClassifier && uses_prop_logits(loss)) {
      const double gp = grad_prop * inv_b;
      s.adam_prop.step(std::span<double>(&s.prop_logit, 1), std::span<const double>(&gp, 1));
    }
  }
}

LinearOvaModel snapshot(const std::vector<LabelState>& states, std::size_t d,
                        bool with_props, std::uint64_t hash) {
  LinearOvaModel model;
  model.m = states.size();
  model.d = d;
  model.config_hash = hash;
  model.weights.resize(model.m * d);
  model.bias.resize(model.m);
  for (std::size_t j = 0; j < model.m; ++j) {
    std::copy_n(states[j].theta.begin(), d, model.weights.begin() + static_cast<std::ptrdiff_t>(j * d));
    model.bias[j] = states[j].theta[d];
    if (with_props) model.prop_logits.push_back(states[j].prop_logit);
  }
  return model;
}

bool all_finite(const std::vector<LabelState>& states) {
  for (const auto& s : states) {
    if (!std::isfinite(s.prop_logit)) return false;
    for (double v : s.theta) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

std::pair<LinearOvaModel, TuningCell> train_cell(const SparseDataset& fit_part,
                                                 const SparseDataset& val_part,
                                                 const TrainConfig& config,
                                                 double lr, double wd) {
  config.validate();
  if (fit_part.n() == 0 || val_part.n() == 0) {
    throw std::invalid_argument("train: empty training or validation part");
  }
  const Packed fit(fit_part), val(val_part);
  const std::size_t m = fit.m, d = fit.d;
  if (config.propensities && config.propensities->m() != m) {
    throw std::invalid_argument("train: propensity length differs from m");
  }
  const bool props = uses_prop_logits(config.loss);

  // Initialization depends only on the seed, so every grid cell starts alike.
  std::vector<LabelState> states;
  states.reserve(m);
  Rng init = Rng::derive(config.seed, "trainer/init");
  const double bound = std::sqrt(1.0 / static_cast<double>(d));
  for (std::size_t j = 0; j < m; ++j) {
    LabelState s(d, lr, wd, config.adam);
    for (std::size_t t = 0; t < d; ++t) s.theta[t] = init.uniform(-bound, bound);
    if (props) s.prop_logit = init.uniform(-std::numbers::e, std::numbers::e);
    states.push_back(std::move(s));
  }
  auto p_fixed = [&](std::size_t j) {
    return config.propensities ? config.propensities->p[j] : 1.0;
  };

  std::vector<std::size_t> rows_all(fit.n);
  std::iota(rows_all.begin(), rows_all.end(), 0);
  // Joint estimation with the mask model uses two fixed halves.
  const std::size_t half = fit.n / 2;

  const auto hash = config.hash();
  TuningCell cell{lr, wd, std::numeric_limits<double>::infinity(), 0, 0, "ok"};
  LinearOvaModel best = snapshot(states, d, props, hash);
  std::size_t since_best = 0;
  std::vector<double> label_loss(m);
  const double denom = static_cast<double>(val.n) * static_cast<double>(m);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Phase phase = Phase::kJoint;
    std::vector<std::size_t> rows;
    if (config.loss == LossKind::kPejlMask && half > 0) {
      phase = epoch % 2 == 0 ? Phase::kClassifier : Phase::kPropensity;
      rows = phase == Phase::kClassifier
                 ? std::vector<std::size_t>(rows_all.begin(), rows_all.begin() + static_cast<std::ptrdiff_t>(half))
                 : std::vector<std::size_t>(rows_all.begin() + static_cast<std::ptrdiff_t>(half), rows_all.end());
    } else {
      rows = rows_all;
    }
    Rng order = Rng::derive(config.seed, "trainer/epoch", epoch);
    order.shuffle(rows);

    parallel_for(m, config.threads, [&](std::size_t j0, std::size_t j1) {
      std::vector<double> grad(d + 1);
      for (std::size_t j = j0; j < j1; ++j) {
        run_label_epoch(fit, rows, config.batch_size, j, states[j], config.loss,
                        p_fixed(j), phase, grad);
        label_loss[j] = label_val_loss(val, j, states[j], config.loss, p_fixed(j));
      }
    });
    cell.epochs_ran = epoch + 1;

    const double obj = pairwise_sum(label_loss) / denom;
    if (!std::isfinite(obj) || !all_finite(states)) {
      cell.status = "failed: non-finite loss at epoch " + std::to_string(epoch + 1);
      cell.val_objective = std::numeric_limits<double>::quiet_NaN();
      return {best, cell};
    }
    if (obj < cell.val_objective) {
      cell.val_objective = obj;
      cell.best_epoch = epoch + 1;
      best = snapshot(states, d, props, hash);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return {best, cell};
}

TrainResult train_ova(const SparseDataset& train, const TrainConfig& config) {
  config.validate();
  if (train.n() < 2) throw std::invalid_argument("train: need at least two instances");

  std::vector<std::size_t> order(train.n());
  std::iota(order.begin(), order.end(), 0);
  Rng split = Rng::derive(config.seed, "trainer/split");
  split.shuffle(order);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(train.n()))),
      1, train.n() - 1);
  const std::span<const std::size_t> all(order);
  const SparseDataset val_part = train.subset(all.first(n_val));
  const SparseDataset fit_part = train.subset(all.subspan(n_val));

  TrainResult result;
  std::optional<std::size_t> best;
  for (double lr : config.lr_grid) {
    for (double wd : config.wd_grid) {
      auto [model, cell] = train_cell(fit_part, val_part, config, lr, wd);
      const bool ok = cell.status == "ok";
      if (ok && (!best || cell.val_objective < result.tuning_log[*best].val_objective)) {
        best = result.tuning_log.size();
        result.model = std::move(model);
      }
      result.tuning_log.push_back(std::move(cell));
    }
  }
  if (!best) throw std::runtime_error("train: every grid cell diverged");
  result.best_cell = *best;
  return result;
}

double objective(const LinearOvaModel& model, const SparseDataset& data,
                 const TrainConfig& config) {
  if (model.d != data.d || model.m != data.m) {
    throw std::invalid_argument("objective: model and data dimensions differ");
  }
  std::vector<double> per_label(model.m);
  const auto props = model.propensities();
  for (std::size_t j = 0; j < model.m; ++j) {
    double total = 0;
    const double p = !props.empty() ? props[j]
                     : config.propensities ? config.propensities->p[j]
                                           : 1.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      const double f = sigmoid(model.logit(j, data.features[i]));
      const double y = std::binary_search(data.labels[i].begin(), data.labels[i].end(),
                                          static_cast<std::uint32_t>(j))
                           ? 1.0
                           : 0.0;
      switch (config.loss) {
        case LossKind::kVanilla: total += loss_vanilla(y, f).value; break;
        case LossKind::kUnbiased: total += loss_unbiased(y, p, f).value; break;
        case LossKind::kPejlPlug:
        case LossKind::kPejlMask: total += loss_pejl_plug(y, p, f).value; break;
      }
    }
    per_label[j] = total;
  }
  return pairwise_sum(per_label) /
         (static_cast<double>(data.n()) * static_cast<double>(model.m));
}

PredictionMatrix predict(const LinearOvaModel& model, const SparseDataset& data) {
  if (model.d != data.d) {
    throw std::invalid_argument("predict: model has d=" + std::to_string(model.d) +
                                " but data has d=" + std::to_string(data.d));
  }
  PredictionMatrix out(data.n(), model.m);
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < model.m; ++j) {
      row[j] = sigmoid(model.logit(j, data.features[i]));
    }
  }
  return out;
}

void save_model(const LinearOvaModel& model, std::ostream& out) {
  out << "xprop-ova-model 1\n";
  out << "m " << model.m << " d " << model.d << " prop_logits "
      << (model.prop_logits.empty() ? 0 : 1) << '\n';
  out << "config_hash " << hex64(model.config_hash) << '\n';
  auto line = [&](std::span<const double> v) {
    for (std::size_t t = 0; t < v.size(); ++t) {
      if (t > 0) out << ' ';
      out << format_double(v[t]);
    }
    out << '\n';
  };
  out << "weights\n";
  for (std::size_t j = 0; j < model.m; ++j) line(model.row(j));
  out << "bias\n";
  line(model.bias);
  if (!model.prop_logits.empty()) {
    out << "prop_logits\n";
    line(model.prop_logits);
  }
}

LinearOvaModel load_model(std::istream& in) {
  auto bad = [](const std::string& what) {
    return std::runtime_error("model checkpoint: " + what);
  };
  std::string tag, key;
  int version = 0;
  if (!(in >> tag >> version) || tag != "xprop-ova-model") throw bad("missing header");
  if (version != 1) throw bad("unsupported version " + std::to_string(version));
  LinearOvaModel model;
  int has_props = 0;
  std::string k1, k2, k3;
  if (!(in >> k1 >> model.m >> k2 >> model.d >> k3 >> has_props) || k1 != "m" ||
      k2 != "d" || k3 != "prop_logits") {
    throw bad("malformed shape line");
  }
  std::string hash_text;
  if (!(in >> key >> hash_text) || key != "config_hash") throw bad("missing config_hash");
  model.config_hash = std::stoull(hash_text, nullptr, 16);
  auto read_values = [&](std::vector<double>& v, std::size_t count) {
    v.resize(count);
    std::string tok;
    for (auto& x : v) {
      if (!(in >> tok) || !parse_double(tok, x)) throw bad("bad number");
    }
  };
  if (!(in >> key) || key != "weights") throw bad("missing weights");
  read_values(model.weights, model.m * model.d);
  if (!(in >> key) || key != "bias") throw bad("missing bias");
  read_values(model.bias, model.m);
  if (has_props) {
    if (!(in >> key) || key != "prop_logits") throw bad("missing prop_logits");
    read_values(model.prop_logits, model.m);
  }
  return model;
}

std::string tuning_log_tsv(std::span<const TuningCell> cells) {
  std::ostringstream out;
  out << "lr\twd\tval_objective\tepochs_ran\tstatus\n";
  for (const auto& c : cells) {
    out << format_double(c.lr) << '\t' << format_double(c.wd) << '\t'
        << format_double(c.val_objective) << '\t' << c.epochs_ran << '\t'
        << c.status << '\n';
  }
  return out.str();
}

}  // namespace xprop
