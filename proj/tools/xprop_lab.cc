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

// Command line front end for the xprop-lab experiments.
//
//   xprop-lab <subcommand> [--config PATH] [--seed N]... [--out PATH]
//             [--threads N] [--section.key VALUE]...
//
// Any config key can be overridden with a flag of the same name. Exit codes:
// 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "xprop/config.h"
#include "xprop/dataset.h"
#include "xprop/experiments.h"
#include "xprop/numeric.h"
#include "xprop/report.h"
#include "xprop/trainer.h"

namespace fs = std::filesystem;
using namespace xprop;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::size_t threads = 0;
  std::string input, train, val, model, series = "label_frequency";
};

void apply_overrides(Config& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() <= 2) {
      throw ConfigError("unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      throw ConfigError("flag --" + key + " needs a value");
    }
    config.set(key, value);
  }
}

Config build_config(const Options& opt, const std::vector<std::string>& extras) {
  Config config = opt.config_path.empty() ? Config{} : Config::load(opt.config_path);
  apply_overrides(config, extras);
  if (!opt.seeds.empty()) {
    std::string list;
    for (std::size_t i = 0; i < opt.seeds.size(); ++i) {
      list += (i ? "," : "") + std::to_string(opt.seeds[i]);
    }
    config.set("seeds", list);
  }
  if (opt.threads > 0) config.set("threads", std::to_string(opt.threads));
  return config;
}

const std::string& require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing --") + what);
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " file not found: " + path);
  return path;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

std::string with_suffix(const std::string& path, const char* suffix) {
  return path.empty() ? std::string() : path + suffix;
}

int run(const std::string& cmd, const Options& opt, const std::vector<std::string>& extras) {
  Config config = build_config(opt, extras);
  const auto hash = config.hash();

  if (cmd == "gen") {
    if (opt.out.empty()) throw ConfigError("gen needs --out DIR");
    auto hb = hyperball_from_config(config);
    hb.seed = seeds_from_config(config).front();
    const auto data = generate_hyperball(hb);
    fs::create_directories(opt.out);
    write_xmlc_file(data.train, fs::path(opt.out) / "train.txt");
    write_xmlc_file(data.val, fs::path(opt.out) / "val.txt");
    write_xmlc_file(data.test, fs::path(opt.out) / "test.txt");
    auto report = stats_report(data.train, hash, std::to_string(hb.seed));
    report.experiment = "gen";
    report.seeds = {hb.seed};
    report.add_table("true_priors", {"label", "prior", "radius"});
    for (std::size_t j = 0; j < hb.m; ++j) {
      report.add_row("true_priors", std::to_string(hb.seed),
                     {std::to_string(j), format_double(data.true_priors.priors[j]),
                      format_double(data.radii[j])});
    }
    emit(report.to_tsv(), (fs::path(opt.out) / "report.tsv").string());
  } else if (cmd == "inject") {
    const auto clean = read_xmlc_file(require_file(opt.input, "input"));
    const auto model = propensity_from_config(config, "noise");
    const auto seed = seeds_from_config(config).front();
    const auto p = model.resolve(estimate_priors(clean, config.get_double("noise_alpha", 1.0)));
    const auto biased = inject_missing(clean, p, seed);
    if (opt.out.empty()) throw ConfigError("inject needs --out PATH");
    write_xmlc_file(biased.data, opt.out);
    ExperimentReport report;
    report.experiment = "inject";
    report.config_hash = hash;
    report.seeds = {seed};
    report.add_table("trace", {"model", "removed", "kept"});
    report.add_row("trace", std::to_string(seed),
                   {model.name, std::to_string(biased.trace.removed),
                    std::to_string(biased.trace.kept)});
    report.add_table("propensities", {"label", "p"});
    for (std::size_t j = 0; j < p.m(); ++j) {
      report.add_row("propensities", std::to_string(seed),
                     {std::to_string(j), format_double(p.p[j])});
    }
    emit(report.to_tsv(), with_suffix(opt.out, ".report.tsv"));
  } else if (cmd == "fit") {
    const auto train = read_xmlc_file(require_file(opt.train, "train"));
    const auto val = read_xmlc_file(require_file(opt.val, "val"));
    if (train.m != val.m) throw ConfigError("train and val have different label counts");
    const auto rc = RecoveryConfig::from_config(config);
    const auto tr = estimate_priors(train, 0.0);
    const auto va = estimate_priors(val, 0.0);
    std::vector<double> priors, targets;
    std::vector<std::size_t> labels;
    for (std::size_t j = 0; j < tr.m(); ++j) {
      if (tr.counts[j] < rc.min_positives || va.counts[j] < rc.min_positives) continue;
      labels.push_back(j);
      priors.push_back(tr.priors[j]);
      targets.push_back(clamp_propensity(tr.priors[j] * rc.p_controlled / va.priors[j]));
    }
    if (labels.empty()) throw std::runtime_error("fit: no label has enough positives");
    const auto fits = fit_families(rc.families, priors, targets, static_cast<double>(train.n()));
    ExperimentReport report;
    report.experiment = "fit";
    report.config_hash = hash;
    report.add_table("mse", {"family", "params", "mse_fitted", "mse_default", "converged"});
    for (const auto& f : fits) {
      std::string params;
      for (std::size_t i = 0; i < f.fit.params.size(); ++i) {
        params += (i ? "," : "") + format_double(f.fit.params[i]);
      }
      report.add_row("mse", "-",
                     {std::string(family_name(f.family)), params, format_double(f.mse_fitted),
                      f.mse_default ? format_double(*f.mse_default) : "-",
                      f.fit.converged ? "yes" : "no"});
    }
    report.add_table("direct", {"label", "observed_prior", "direct"});
    for (std::size_t i = 0; i < labels.size(); ++i) {
      report.add_row("direct", "-", {std::to_string(labels[i]), format_double(priors[i]),
                                     format_double(targets[i])});
    }
    emit(report.to_tsv(), opt.out);
  } else if (cmd == "train") {
    const auto train = read_xmlc_file(require_file(opt.input, "input"));
    auto tc = train_from_config(config);
    tc.seed = seeds_from_config(config).front();
    if (tc.loss == LossKind::kUnbiased) {
      tc.propensities = propensity_from_config(config, "propensity")
                            .resolve(estimate_priors(train, 1.0));
    }
    const auto result = train_ova(train, tc);
    if (opt.out.empty()) throw ConfigError("train needs --out PATH for the checkpoint");
    {
      std::ofstream f(opt.out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + opt.out);
      save_model(result.model, f);
    }
    ExperimentReport report;
    report.experiment = "train";
    report.config_hash = hash;
    report.seeds = {tc.seed};
    report.add_table("tuning", {"lr", "wd", "val_objective", "epochs_ran", "status"});
    for (const auto& c : result.tuning_log) {
      report.add_row("tuning", std::to_string(tc.seed),
                     {format_double(c.lr), format_double(c.wd), format_double(c.val_objective),
                      std::to_string(c.epochs_ran), c.status});
    }
    emit(report.to_tsv(), with_suffix(opt.out, ".report.tsv"));
  } else if (cmd == "eval") {
    const auto test = read_xmlc_file(require_file(opt.input, "input"));
    std::ifstream mf(require_file(opt.model, "model"));
    const auto model = load_model(mf);
    const auto scores = predict(model, test);
    const auto ks = ks_from_config(config);
    ExperimentReport report;
    report.experiment = "eval";
    report.config_hash = hash;
    if (config.section("propensity").empty()) {
      add_metric_rows(report, "-", "test", evaluate_all(test.labels, scores, ks));
    } else {
      const auto p = propensity_from_config(config, "propensity")
                         .resolve(estimate_priors(test, 1.0));
      add_metric_rows(report, "-", "test", evaluate_all(test.labels, scores, ks, &p));
    }
    emit(report.to_tsv(), opt.out);
  } else if (cmd == "mismatch") {
    emit(run_mismatch_experiment(MismatchConfig::from_config(config)).report.to_tsv(), opt.out);
  } else if (cmd == "recovery") {
    emit(run_propensity_recovery(RecoveryConfig::from_config(config)).report.to_tsv(), opt.out);
  } else if (cmd == "feasibility") {
    emit(run_feasibility_demo(hash).to_tsv(), opt.out);
  } else if (cmd == "stats") {
    const auto data = read_xmlc_file(require_file(opt.input, "input"));
    emit(stats_report(data, hash).to_tsv(), opt.out);
  } else if (cmd == "plot-data") {
    if (opt.series == "label_frequency") {
      const auto data = read_xmlc_file(require_file(opt.input, "input"));
      emit(emit_plot_data(stats_report(data, hash), opt.series), opt.out);
    } else if (opt.series == "propensity_scatter") {
      const auto result = run_propensity_recovery(RecoveryConfig::from_config(config));
      emit(emit_plot_data(result.report, opt.series), opt.out);
    } else {
      throw ConfigError("unknown series '" + opt.series + "'");
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xprop-lab: propensity models and propensity-scored metrics"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"gen", "generate hyper-ball train/val/test sets"},
      {"inject", "drop relevant labels according to a propensity model"},
      {"fit", "direct propensity estimates and family fits"},
      {"train", "train a one-vs-all linear model"},
      {"eval", "evaluate a checkpoint on a dataset"},
      {"mismatch", "noise model x training model experiment"},
      {"recovery", "propensity recovery experiment"},
      {"feasibility", "unbiased estimator feasibility demo"},
      {"stats", "dataset imbalance statistics"},
      {"plot-data", "plot-ready TSV series"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--config", opt.config_path, "config file");
    sub->add_option("--seed", opt.seeds, "seed (repeatable)");
    sub->add_option("--out", opt.out, "output path");
    sub->add_option("--threads", opt.threads, "worker threads");
    if (name == "inject" || name == "train" || name == "eval" || name == "stats" ||
        name == "plot-data") {
      sub->add_option("--input", opt.input, "input dataset");
    }
    if (name == "fit") {
      sub->add_option("--train", opt.train, "biased training set");
      sub->add_option("--val", opt.val, "bias-controlled validation set");
    }
    if (name == "eval") sub->add_option("--model", opt.model, "model checkpoint");
    if (name == "plot-data") {
      sub->add_option("--series", opt.series, "label_frequency or propensity_scatter");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    return run(sub->get_name(), opt, sub->remaining());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
