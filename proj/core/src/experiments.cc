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

#include "xprop/experiments.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "xprop/feasibility.h"
#include "xprop/numeric.h"
#include "xprop/parallel.h"
#include "xprop/rng.h"

namespace xprop {
namespace {

std::string fmt(double v) { return format_double(v); }

// Runs `fn` and turns argument errors into configuration errors.
template <typename Fn>
auto as_config(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::uint64_t stream_seed(std::uint64_t root, std::string_view purpose, std::uint64_t index = 0) {
  return Rng::derive(root, purpose, index).next();
}

LabelPriors priors_from(std::span<const double> priors, std::size_t n) {
  LabelPriors lp;
  lp.n = n;
  lp.alpha = 0;
  lp.counts.assign(priors.size(), 0);
  lp.priors.assign(priors.begin(), priors.end());
  return lp;
}

}  // namespace

HyperBallConfig hyperball_from_config(const Config& config, const std::string& section) {
  HyperBallConfig hb;
  const std::string s = section + ".";
  hb.m = config.get_uint(s + "m", hb.m);
  hb.dim = config.get_uint(s + "dim", hb.dim);
  hb.r_min = config.get_double(s + "r_min", hb.r_min);
  hb.r_max = config.get_double(s + "r_max", hb.r_max);
  hb.n_train = config.get_uint(s + "n_train", hb.n_train);
  hb.n_val = config.get_uint(s + "n_val", hb.n_val);
  hb.n_test = config.get_uint(s + "n_test", hb.n_test);
  hb.squared_norm_feature = config.get_bool(s + "squared_norm_feature", hb.squared_norm_feature);
  as_config("[" + section + "]", [&] {
    hb.validate();
    return 0;
  });
  return hb;
}

TrainConfig train_from_config(const Config& config, const std::string& section) {
  TrainConfig tc;
  const std::string s = section + ".";
  tc.loss = as_config(s + "loss", [&] {
    return parse_loss(config.get_string(s + "loss", std::string(loss_name(tc.loss))));
  });
  tc.lr_grid = config.get_doubles(s + "lr_grid", tc.lr_grid);
  tc.wd_grid = config.get_doubles(s + "wd_grid", tc.wd_grid);
  tc.epochs = config.get_uint(s + "epochs", tc.epochs);
  tc.batch_size = config.get_uint(s + "batch_size", tc.batch_size);
  tc.patience = config.get_uint(s + "patience", tc.patience);
  tc.val_fraction = config.get_double(s + "val_fraction", tc.val_fraction);
  tc.adam.beta1 = config.get_double(s + "beta1", tc.adam.beta1);
  tc.adam.beta2 = config.get_double(s + "beta2", tc.adam.beta2);
  tc.adam.eps = config.get_double(s + "eps", tc.adam.eps);
  tc.threads = config.get_uint("threads", tc.threads);
  return tc;
}

std::vector<std::uint64_t> seeds_from_config(const Config& config) {
  auto seeds = config.get_uints("seeds", std::vector<std::uint64_t>{1});
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  return seeds;
}

std::vector<std::size_t> ks_from_config(const Config& config) {
  const auto raw = config.get_uints("metrics.k", std::vector<std::uint64_t>{1, 3, 5});
  if (raw.empty()) throw ConfigError("metrics.k must not be empty");
  std::vector<std::size_t> ks;
  for (auto k : raw) {
    if (k == 0) throw ConfigError("metrics.k values must be >= 1");
    ks.push_back(k);
  }
  return ks;
}

PropensityAssignment NamedPropensityModel::resolve(const LabelPriors& priors) const {
  PropensityModelSpec s = spec;
  if (beta_from_max_prior) {
    const double top = *std::max_element(priors.priors.begin(), priors.priors.end());
    s.params.at(0) = 1.0 / top;
  }
  auto out = assign(s, priors);
  out.source = name;
  return out;
}

NamedPropensityModel propensity_from_config(const Config& config, const std::string& section) {
  auto kv = config.section(section);
  if (kv.empty()) throw ConfigError("missing propensity section [" + section + "]");
  NamedPropensityModel model;
  const bool named_section = section.rfind("model.", 0) == 0;
  if (named_section) model.name = section.substr(6);
  if (auto it = kv.find("name"); it != kv.end()) {
    model.name = it->second;
    kv.erase(it);
  }
  if (auto it = kv.find("beta"); it != kv.end() && it->second == "auto") {
    model.beta_from_max_prior = true;
    it->second = "1";
  }
  model.spec = as_config("[" + section + "]", [&] { return spec_from_kv(kv); });
  if (model.name.empty()) model.name = std::string(family_name(model.spec.family));
  if (model.beta_from_max_prior && model.spec.family != PropensityFamily::kPowerLaw) {
    throw ConfigError("[" + section + "]: beta = auto needs family = power");
  }
  return model;
}

std::vector<MetricValue> evaluate_all(const LabelRows& labels, const PredictionMatrix& scores,
                                      std::span<const std::size_t> ks,
                                      const PropensityAssignment* propensities) {
  std::vector<MetricValue> out;
  for (auto k : ks) {
    out.push_back(precision_at_k(labels, scores, k));
    out.push_back(recall_at_k(labels, scores, k));
    out.push_back(ndcg_at_k(labels, scores, k));
    out.push_back(abandonment_at_k(labels, scores, k));
    out.push_back(coverage_at_k(labels, scores, k));
    if (propensities != nullptr) {
      out.push_back(ps_precision_at_k(labels, scores, k, *propensities));
      out.push_back(ps_recall_at_k(labels, scores, k, *propensities));
      out.push_back(ps_ndcg_at_k(labels, scores, k, *propensities));
      out.push_back(normalized_psp_at_k(labels, scores, k, *propensities));
    }
  }
  return out;
}

void add_metric_rows(ExperimentReport& report, const std::string& seed,
                     const std::string& split, std::span<const MetricValue> values) {
  if (report.find("metrics") == nullptr) {
    report.add_table("metrics", {"split", "metric", "k", "value", "n_evaluated", "skipped"});
  }
  for (const auto& v : values) {
    report.add_row("metrics", seed,
                   {split, v.name, std::to_string(v.k), fmt(v.value),
                    std::to_string(v.n_evaluated), std::to_string(v.skipped)});
  }
}

ExperimentReport stats_report(const SparseDataset& data, std::uint64_t config_hash,
                              const std::string& seed) {
  ExperimentReport report;
  report.experiment = "stats";
  report.config_hash = config_hash;
  const auto counts = label_counts(data);
  report.add_table("dataset", {"n", "d", "m", "positives"});
  report.add_row("dataset", seed,
                 {std::to_string(data.n()), std::to_string(data.d), std::to_string(data.m),
                  std::to_string(total_positives(data))});
  report.add_table("imbalance", {"min_ir", "ilir", "pos80"});
  try {
    const auto stats = imbalance_stats(estimate_priors(data, 0.0));
    report.add_row("imbalance", seed, {fmt(stats.min_ir), fmt(stats.ilir), fmt(stats.pos80)});
  } catch (const std::domain_error& e) {
    report.add_row("imbalance", seed, {"nan", "nan", fmt(pos80_fraction(counts))});
    report.footnotes.push_back(std::string("imbalance ratios: ") + e.what());
  }
  report.add_table("label_frequency", {"rank", "count"});
  for (const auto& [rank, count] : label_frequency(counts)) {
    report.add_row("label_frequency", seed, {std::to_string(rank), std::to_string(count)});
  }
  return report;
}

// ---- Mismatch --------------------------------------------------------------

MismatchConfig MismatchConfig::from_config(const Config& config) {
  MismatchConfig mc;
  mc.data = hyperball_from_config(config);
  mc.train = train_from_config(config);
  mc.train.loss = LossKind::kUnbiased;
  mc.seeds = seeds_from_config(config);
  mc.threads = config.get_uint("threads", 1);
  const auto names = config.get_string("mismatch.models", "jpv,power");
  std::size_t start = 0;
  while (start <= names.size()) {
    auto comma = names.find(',', start);
    auto end = comma == std::string::npos ? names.size() : comma;
    std::string name = names.substr(start, end - start);
    name.erase(0, name.find_first_not_of(' '));
    name.erase(name.find_last_not_of(' ') + 1);
    if (!name.empty()) {
      const std::string section = "model." + name;
      if (config.section(section).empty()) {
        if (name == "jpv") {
          mc.models.push_back({name, PropensityModelSpec::jpv_default(), false});
        } else if (name == "power") {
          mc.models.push_back({name, PropensityModelSpec::power_law(1.0, 0.8), true});
        } else {
          throw ConfigError("missing section [" + section + "]");
        }
      } else {
        mc.models.push_back(propensity_from_config(config, section));
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (mc.models.size() < 2) throw ConfigError("mismatch.models needs at least two models");
  mc.config_hash = config.hash();
  return mc;
}

namespace {

std::vector<MismatchCell> mismatch_seed(const MismatchConfig& config, std::uint64_t seed) {
  HyperBallConfig hb = config.data;
  hb.seed = seed;
  const auto data = generate_hyperball(hb);
  const auto priors = estimate_priors(data.train, 1.0);
  const std::size_t k_models = config.models.size();
  std::vector<PropensityAssignment> p;
  for (const auto& model : config.models) p.push_back(model.resolve(priors));

  std::vector<MismatchCell> cells;
  for (std::size_t noise = 0; noise < k_models; ++noise) {
    const auto train = inject_missing(data.train, p[noise],
                                      stream_seed(seed, "mismatch/train-noise", noise));
    const auto test = inject_missing(data.test, p[noise],
                                     stream_seed(seed, "mismatch/test-noise", noise));
    for (std::size_t t = 0; t < k_models; ++t) {
      TrainConfig tc = config.train;
      tc.loss = LossKind::kUnbiased;
      tc.propensities = p[t];
      tc.seed = seed;
      tc.threads = 1;
      const auto result = train_ova(train.data, tc);
      const auto scores = predict(result.model, data.test);
      MismatchCell cell;
      cell.seed = seed;
      cell.noise = noise;
      cell.train = t;
      cell.p_at_1 = precision_at_k(data.test.labels, scores, 1).value;
      cell.p_at_3 = precision_at_k(data.test.labels, scores, 3).value;
      cell.p_at_5 = precision_at_k(data.test.labels, scores, 5).value;
      for (std::size_t v = 0; v < k_models; ++v) {
        cell.psp_at_1.push_back(ps_precision_at_k(test.data.labels, scores, 1, p[v]).value);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace

double MismatchResult::matched_p1_rate(std::size_t noise) const {
  std::size_t seeds = 0, wins = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (c.noise != noise || c.train != noise) continue;
    ++seeds;
    bool best = true;
    for (const auto& o : cells) {
      if (o.seed == c.seed && o.noise == noise && o.train != noise && o.p_at_1 > c.p_at_1) {
        best = false;
      }
    }
    wins += best;
  }
  return seeds == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(seeds);
}

double MismatchResult::own_psp_rate(std::size_t noise, std::size_t variant) const {
  std::size_t seeds = 0, wins = 0;
  for (const auto& c : cells) {
    if (c.noise != noise || c.train != variant) continue;
    ++seeds;
    bool best = true;
    for (const auto& o : cells) {
      if (o.seed == c.seed && o.noise == noise && o.train != variant &&
          o.psp_at_1[variant] > c.psp_at_1[variant]) {
        best = false;
      }
    }
    wins += best;
  }
  return seeds == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(seeds);
}

MismatchResult run_mismatch_experiment(const MismatchConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("mismatch: no seeds");
  if (config.models.size() < 2) throw std::invalid_argument("mismatch: need two models");
  const std::size_t k_models = config.models.size();

  std::vector<std::vector<MismatchCell>> per_seed(config.seeds.size());
  parallel_for(config.seeds.size(), config.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) per_seed[s] = mismatch_seed(config, config.seeds[s]);
  });

  MismatchResult result;
  for (const auto& m : config.models) result.model_names.push_back(m.name);
  for (auto& cells : per_seed) {
    for (auto& c : cells) result.cells.push_back(std::move(c));
  }

  auto& report = result.report;
  report.experiment = "mismatch";
  report.config_hash = config.config_hash;
  report.seeds = config.seeds;
  std::vector<std::string> cols{"noise", "train", "P@1", "P@3", "P@5"};
  for (const auto& name : result.model_names) cols.push_back("PSP@1(" + name + ")");
  report.add_table("per_seed", cols);
  for (const auto& c : result.cells) {
    std::vector<std::string> row{result.model_names[c.noise], result.model_names[c.train],
                                 fmt(c.p_at_1), fmt(c.p_at_3), fmt(c.p_at_5)};
    for (double v : c.psp_at_1) row.push_back(fmt(v));
    report.add_row("per_seed", std::to_string(c.seed), std::move(row));
  }

  std::vector<std::string> summary_cols{"noise", "train"};
  for (const char* metric : {"P@1", "P@3", "P@5"}) {
    summary_cols.push_back(std::string(metric) + "_mean");
    summary_cols.push_back(std::string(metric) + "_se");
  }
  for (const auto& name : result.model_names) {
    summary_cols.push_back("PSP@1(" + name + ")_mean");
    summary_cols.push_back("PSP@1(" + name + ")_se");
    summary_cols.push_back("PSP@1(" + name + ")_flag");
  }
  report.add_table("summary", summary_cols);
  for (std::size_t noise = 0; noise < k_models; ++noise) {
    for (std::size_t t = 0; t < k_models; ++t) {
      std::vector<double> p1, p3, p5;
      std::vector<std::vector<double>> psp(k_models);
      for (const auto& c : result.cells) {
        if (c.noise != noise || c.train != t) continue;
        p1.push_back(c.p_at_1);
        p3.push_back(c.p_at_3);
        p5.push_back(c.p_at_5);
        for (std::size_t v = 0; v < k_models; ++v) psp[v].push_back(c.psp_at_1[v]);
      }
      auto se = [](const std::vector<double>& v) {
        return v.size() < 2 ? std::string("nan") : fmt(standard_error(v));
      };
      std::vector<std::string> row{result.model_names[noise], result.model_names[t],
                                   fmt(mean(p1)), se(p1), fmt(mean(p3)), se(p3),
                                   fmt(mean(p5)), se(p5)};
      for (std::size_t v = 0; v < k_models; ++v) {
        row.push_back(fmt(mean(psp[v])));
        row.push_back(se(psp[v]));
        row.push_back(v == noise ? "compatible" : "incompatible");
      }
      report.add_row("summary", "all", std::move(row));
    }
  }

  report.add_table("wins", {"noise", "criterion", "rate"});
  for (std::size_t noise = 0; noise < k_models; ++noise) {
    report.add_row("wins", "all",
                   {result.model_names[noise], "matched_best_P@1", fmt(result.matched_p1_rate(noise))});
    for (std::size_t v = 0; v < k_models; ++v) {
      report.add_row("wins", "all",
                     {result.model_names[noise],
                      "own_model_best_PSP@1(" + result.model_names[v] + ")",
                      fmt(result.own_psp_rate(noise, v))});
    }
  }
  return result;
}

// ---- Recovery --------------------------------------------------------------

RecoveryConfig RecoveryConfig::from_config(const Config& config) {
  RecoveryConfig rc;
  rc.data = hyperball_from_config(config);
  if (config.section("noise").empty()) {
    rc.noise = {"power", PropensityModelSpec::power_law(1.0, 0.3), true};
  } else {
    rc.noise = propensity_from_config(config, "noise");
  }
  rc.p_controlled = config.get_double("recovery.p_controlled", rc.p_controlled);
  if (!(rc.p_controlled > 0 && rc.p_controlled <= 1)) {
    throw ConfigError("recovery.p_controlled must be in (0, 1]");
  }
  rc.min_positives = config.get_uint("recovery.min_positives", rc.min_positives);
  if (rc.min_positives == 0) throw ConfigError("recovery.min_positives must be >= 1");
  if (config.has("recovery.families")) {
    rc.families.clear();
    std::string list = config.get_string("recovery.families");
    std::size_t start = 0;
    while (start <= list.size()) {
      auto comma = list.find(',', start);
      auto end = comma == std::string::npos ? list.size() : comma;
      std::string name = list.substr(start, end - start);
      name.erase(0, name.find_first_not_of(' '));
      name.erase(name.find_last_not_of(' ') + 1);
      if (!name.empty()) {
        rc.families.push_back(as_config("recovery.families", [&] { return parse_family(name); }));
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (rc.families.empty()) throw ConfigError("recovery.families must not be empty");
  }
  rc.seed = seeds_from_config(config).front();
  rc.config_hash = config.hash();
  return rc;
}

std::vector<FamilyFit> fit_families(std::span<const PropensityFamily> families,
                                    std::span<const double> priors,
                                    std::span<const double> targets, double n) {
  std::vector<FamilyFit> out;
  const auto lp = priors_from(priors, static_cast<std::size_t>(n));
  for (auto family : families) {
    FitProblem problem;
    problem.family = family;
    problem.priors.assign(priors.begin(), priors.end());
    problem.targets.assign(targets.begin(), targets.end());
    problem.n = n;
    FamilyFit ff{family, fit_family(problem), 0, std::nullopt};
    ff.mse_fitted = ff.fit.mse;
    if (family == PropensityFamily::kJpv) {
      ff.mse_default = fit_mse(assign(PropensityModelSpec::jpv_default(), lp), targets);
    } else if (family == PropensityFamily::kPowerLaw) {
      ff.mse_default = fit_mse(assign(PropensityModelSpec::power_law(1.0, 1.0), lp), targets);
    }
    out.push_back(std::move(ff));
  }
  std::stable_sort(out.begin(), out.end(), [](const FamilyFit& a, const FamilyFit& b) {
    return a.mse_fitted < b.mse_fitted;
  });
  return out;
}

RecoveryResult run_propensity_recovery(const RecoveryConfig& config) {
  HyperBallConfig hb = config.data;
  hb.seed = config.seed;
  const auto data = generate_hyperball(hb);
  const auto clean_priors = estimate_priors(data.train, 1.0);
  const auto p_true = config.noise.resolve(clean_priors);
  const auto train = inject_missing(data.train, p_true, stream_seed(config.seed, "recovery/train-noise"));
  PropensityAssignment controlled;
  controlled.p.assign(data.val.m, config.p_controlled);
  controlled.source = "controlled";
  const auto val = inject_missing(data.val, controlled, stream_seed(config.seed, "recovery/val-noise"));

  const auto tr = estimate_priors(train.data, 0.0);
  const auto va = estimate_priors(val.data, 0.0);
  RecoveryResult result;
  std::size_t covered = 0;
  for (std::uint32_t j = 0; j < tr.m(); ++j) {
    const auto ct = tr.counts[j], cv = va.counts[j];
    if (ct < config.min_positives || cv < config.min_positives) continue;
    const double pt = tr.priors[j], pv = va.priors[j];
    const double p_hat = clamp_propensity(pt * config.p_controlled / pv);
    const double rel = std::sqrt((1 - pt) / static_cast<double>(ct) +
                                 (1 - pv) / static_cast<double>(cv));
    result.labels.push_back(j);
    result.observed_prior.push_back(pt);
    result.direct.push_back(p_hat);
    result.sigma.push_back(p_hat * rel);
    result.true_p.push_back(p_true.p[j]);
    covered += std::abs(p_hat - p_true.p[j]) <= 3 * p_hat * rel;
  }
  if (result.labels.empty()) {
    throw std::runtime_error("recovery: no label has enough positives for a direct estimate");
  }
  result.within_3_sigma = static_cast<double>(covered) / static_cast<double>(result.labels.size());
  const double n = static_cast<double>(train.data.n());
  result.fits = fit_families(config.families, result.observed_prior, result.direct, n);

  auto& report = result.report;
  report.experiment = "recovery";
  report.config_hash = config.config_hash;
  report.seeds = {config.seed};
  const auto seed = std::to_string(config.seed);
  report.add_table("summary", {"labels_estimated", "labels_total", "within_3_sigma", "noise"});
  report.add_row("summary", seed,
                 {std::to_string(result.labels.size()), std::to_string(tr.m()),
                  fmt(result.within_3_sigma), config.noise.name});
  report.add_table("mse", {"family", "params", "mse_fitted", "mse_default", "iterations",
                           "converged", "degenerate"});
  for (const auto& f : result.fits) {
    std::string params;
    for (std::size_t i = 0; i < f.fit.params.size(); ++i) {
      params += (i ? "," : "") + fmt(f.fit.params[i]);
    }
    report.add_row("mse", seed,
                   {std::string(family_name(f.family)), params, fmt(f.mse_fitted),
                    f.mse_default ? fmt(*f.mse_default) : "-", std::to_string(f.fit.iterations),
                    f.fit.converged ? "yes" : "no", f.fit.degenerate ? "yes" : "no"});
    if (f.fit.degenerate) {
      report.footnotes.push_back(std::string(family_name(f.family)) +
                                 " fit left the model's codomain for some labels");
    }
  }
  std::vector<std::string> cols{"label", "observed_prior", "direct", "sigma", "true_p"};
  for (const auto& f : result.fits) cols.push_back("fit_" + std::string(family_name(f.family)));
  report.add_table("propensity_scatter", cols);
  const auto lp = priors_from(result.observed_prior, train.data.n());
  std::vector<std::vector<double>> fitted;
  for (const auto& f : result.fits) fitted.push_back(assign(f.fit.spec(f.family), lp).p);
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    std::vector<std::string> row{std::to_string(result.labels[i]), fmt(result.observed_prior[i]),
                                 fmt(result.direct[i]), fmt(result.sigma[i]),
                                 fmt(result.true_p[i])};
    for (const auto& f : fitted) row.push_back(fmt(f[i]));
    report.add_row("propensity_scatter", seed, std::move(row));
  }
  if (result.labels.size() < tr.m()) {
    report.footnotes.push_back(std::to_string(tr.m() - result.labels.size()) +
                               " labels skipped: fewer than " +
                               std::to_string(config.min_positives) + " positives");
  }
  return result;
}

// ---- Feasibility -----------------------------------------------------------

ExperimentReport run_feasibility_demo(std::uint64_t config_hash) {
  ExperimentReport report;
  report.experiment = "feasibility";
  report.config_hash = config_hash;
  report.add_table("feasibility", {"case", "loss", "prediction", "feasible", "residual",
                                   "equations", "unknowns"});
  const double half[] = {0.5, 0.5};
  struct Case {
    std::string name;
    std::vector<MaskModel> models;
  };
  const std::vector<Case> cases{
      {"no_noise", {no_noise_masks(2)}},
      {"independent", {independent_masks(half)}},
      {"joint_missing", {joint_missing_masks(0.5)}},
      {"complementary", {complementary_missing_masks()}},
      {"correlated", {joint_missing_masks(0.5), complementary_missing_masks()}},
  };
  for (const auto& c : cases) {
    for (const char* loss : {"subset01", "hamming"}) {
      for (unsigned pred = 0; pred < 4; ++pred) {
        const auto target = std::string(loss) == "subset01" ? subset_zero_one_loss(2, pred)
                                                            : hamming_loss(2, pred);
        const auto r = check_unbiased_estimator_exists(2, c.models, target);
        report.add_row("feasibility", "-",
                       {c.name, loss, std::to_string(pred), r.feasible ? "yes" : "no",
                        fmt(r.residual), std::to_string(r.equations),
                        std::to_string(r.unknowns)});
      }
    }
  }
  return report;
}

// ---- Pipeline --------------------------------------------------------------

PipelineConfig PipelineConfig::from_config(const Config& config) {
  PipelineConfig pc;
  pc.data = hyperball_from_config(config);
  pc.train = train_from_config(config);
  pc.noise = config.section("noise").empty()
                 ? NamedPropensityModel{"jpv", PropensityModelSpec::jpv_default(), false}
                 : propensity_from_config(config, "noise");
  pc.ks = ks_from_config(config);
  pc.seed = seeds_from_config(config).front();
  pc.config_hash = config.hash();
  return pc;
}

ExperimentReport run_pipeline(const PipelineConfig& config) {
  HyperBallConfig hb = config.data;
  hb.seed = config.seed;
  const auto data = generate_hyperball(hb);
  const auto p = config.noise.resolve(estimate_priors(data.train, 1.0));
  const auto train = inject_missing(data.train, p, stream_seed(config.seed, "pipeline/train-noise"));
  const auto test = inject_missing(data.test, p, stream_seed(config.seed, "pipeline/test-noise"));

  TrainConfig tc = config.train;
  tc.seed = config.seed;
  if (tc.loss == LossKind::kUnbiased) tc.propensities = p;
  const auto trained = train_ova(train.data, tc);
  const auto scores = predict(trained.model, data.test);

  ExperimentReport report;
  report.experiment = "pipeline";
  report.config_hash = config.config_hash;
  report.seeds = {config.seed};
  const auto seed = std::to_string(config.seed);
  report.add_table("noise", {"model", "removed", "kept"});
  report.add_row("noise", seed, {config.noise.name, std::to_string(train.trace.removed),
                                 std::to_string(train.trace.kept)});
  report.add_table("tuning", {"lr", "wd", "val_objective", "epochs_ran", "status"});
  for (const auto& c : trained.tuning_log) {
    report.add_row("tuning", seed, {fmt(c.lr), fmt(c.wd), fmt(c.val_objective),
                                    std::to_string(c.epochs_ran), c.status});
  }
  add_metric_rows(report, seed, "clean_test", evaluate_all(data.test.labels, scores, config.ks));
  add_metric_rows(report, seed, "biased_test",
                  evaluate_all(test.data.labels, scores, config.ks, &p));
  return report;
}

}  // namespace xprop
