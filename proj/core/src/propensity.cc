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

#include "xprop/propensity.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "xprop/numeric.h"

namespace xprop {

double clamp_propensity(double p) {
  if (std::isnan(p)) throw std::domain_error("propensity is NaN");
  return std::clamp(p, kMinPropensity, 1.0);
}

JpvValue eval_jpv(double prior, double n, double a, double b) {
  if (!(n >= 1.0)) throw std::domain_error("JPV requires n >= 1");
  const double base = n * prior + b;
  if (!(base > 0.0)) throw std::domain_error("JPV requires n * prior + b > 0");
  const double log_n = std::log(n);
  const double raw =
      1.0 / (1.0 + (log_n - 1.0) * std::pow(b + 1.0, a) *
                       std::exp(-a * std::log(base)));
  JpvValue out;
  out.degenerate = n < 3.0 || !(raw > 0.0 && raw <= 1.0);
  // At the pole 1 + (...) = 0 the raw value is infinite; past it, negative.
  out.value = std::isfinite(raw) ? clamp_propensity(raw) : 1.0;
  return out;
}

double eval_power(double prior, double beta, double gamma) {
  if (!(beta * prior > 0.0)) {
    throw std::domain_error("power-law requires beta * prior > 0");
  }
  if (!(gamma >= 0.0)) throw std::domain_error("power-law requires gamma >= 0");
  return clamp_propensity(std::pow(beta * prior, gamma));
}

double eval_richards(double prior, const RichardsParams& r) {
  if (r.h == 0.0) throw std::domain_error("Richards curve requires h != 0");
  const double base = r.e + r.f * std::exp(-r.g * prior);
  if (!(base > 0.0)) {
    throw std::domain_error("Richards curve base e + f exp(-g prior) <= 0");
  }
  return clamp_propensity(r.c + (r.d - r.c) / std::pow(base, 1.0 / r.h));
}

std::string_view family_name(PropensityFamily family) {
  switch (family) {
    case PropensityFamily::kConstant: return "constant";
    case PropensityFamily::kJpv: return "jpv";
    case PropensityFamily::kPowerLaw: return "power";
    case PropensityFamily::kRichards: return "richards";
    case PropensityFamily::kDirectTable: return "direct";
  }
  return "?";
}

PropensityFamily parse_family(std::string_view name) {
  for (auto f : {PropensityFamily::kConstant, PropensityFamily::kJpv,
                 PropensityFamily::kPowerLaw, PropensityFamily::kRichards,
                 PropensityFamily::kDirectTable}) {
    if (family_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown propensity family '" +
                              std::string(name) + "'");
}

PropensityModelSpec PropensityModelSpec::constant(double p) {
  return {PropensityFamily::kConstant, {p}};
}
PropensityModelSpec PropensityModelSpec::jpv(double a, double b, double n) {
  return {PropensityFamily::kJpv, {a, b, n}};
}
PropensityModelSpec PropensityModelSpec::power_law(double beta, double gamma) {
  return {PropensityFamily::kPowerLaw, {beta, gamma}};
}
PropensityModelSpec PropensityModelSpec::richards(const RichardsParams& r) {
  return {PropensityFamily::kRichards, {r.c, r.d, r.e, r.f, r.g, r.h}};
}
PropensityModelSpec PropensityModelSpec::direct_table(std::vector<double> table) {
  return {PropensityFamily::kDirectTable, std::move(table)};
}

std::vector<std::string> parameter_names(PropensityFamily family) {
  switch (family) {
    case PropensityFamily::kConstant: return {"p"};
    case PropensityFamily::kJpv: return {"a", "b", "n"};
    case PropensityFamily::kPowerLaw: return {"beta", "gamma"};
    case PropensityFamily::kRichards: return {"c", "d", "e", "f", "g", "h"};
    case PropensityFamily::kDirectTable: return {"table"};
  }
  return {};
}

std::string to_kv(const PropensityModelSpec& spec) {
  std::ostringstream out;
  out << "family = " << family_name(spec.family) << '\n';
  if (spec.family == PropensityFamily::kDirectTable) {
    out << "table = ";
    for (std::size_t j = 0; j < spec.params.size(); ++j) {
      if (j > 0) out << ',';
      out << format_double(spec.params[j]);
    }
    out << '\n';
    return out.str();
  }
  const auto names = parameter_names(spec.family);
  for (std::size_t i = 0; i < names.size() && i < spec.params.size(); ++i) {
    out << names[i] << " = " << format_double(spec.params[i]) << '\n';
  }
  return out.str();
}

PropensityModelSpec spec_from_kv(const std::map<std::string, std::string>& kv) {
  const auto fam = kv.find("family");
  if (fam == kv.end()) throw std::invalid_argument("propensity spec: missing 'family'");
  PropensityModelSpec spec;
  spec.family = parse_family(fam->second);
  spec.params.clear();
  auto number = [](const std::string& key, const std::string& text) {
    double v = 0;
    if (!parse_double(text, v)) {
      throw std::invalid_argument("propensity spec: '" + key +
                                  "' is not a number: " + text);
    }
    return v;
  };
  if (spec.family == PropensityFamily::kDirectTable) {
    const auto it = kv.find("table");
    if (it == kv.end()) throw std::invalid_argument("propensity spec: missing 'table'");
    std::string_view s = it->second;
    std::size_t start = 0;
    while (start <= s.size()) {
      std::size_t comma = s.find(',', start);
      if (comma == std::string_view::npos) comma = s.size();
      std::string tok(s.substr(start, comma - start));
      tok.erase(0, tok.find_first_not_of(' '));
      tok.erase(tok.find_last_not_of(' ') + 1);
      spec.params.push_back(number("table", tok));
      start = comma + 1;
    }
    return spec;
  }
  for (const auto& name : parameter_names(spec.family)) {
    const auto it = kv.find(name);
    if (it != kv.end()) {
      spec.params.push_back(number(name, it->second));
    } else if (spec.family == PropensityFamily::kJpv && name == "n") {
      spec.params.push_back(0.0);
    } else {
      throw std::invalid_argument("propensity spec: missing '" + name + "'");
    }
  }
  return spec;
}

std::optional<double> evaluate_unclamped(PropensityFamily family,
                                         std::span<const double> params,
                                         double prior, double n) {
  switch (family) {
    case PropensityFamily::kConstant:
      return params[0];
    case PropensityFamily::kJpv: {
      const double a = params[0], b = params[1];
      const double base = n * prior + b;
      if (!(n >= 1.0) || !(base > 0.0)) return std::nullopt;
      return 1.0 / (1.0 + (std::log(n) - 1.0) * std::pow(b + 1.0, a) *
                              std::exp(-a * std::log(base)));
    }
    case PropensityFamily::kPowerLaw: {
      const double beta = params[0], gamma = params[1];
      if (!(beta * prior > 0.0) || !(gamma >= 0.0)) return std::nullopt;
      return std::pow(beta * prior, gamma);
    }
    case PropensityFamily::kRichards: {
      const double c = params[0], d = params[1], e = params[2], f = params[3],
                   g = params[4], h = params[5];
      const double base = e + f * std::exp(-g * prior);
      if (h == 0.0 || !(base > 0.0)) return std::nullopt;
      return c + (d - c) / std::pow(base, 1.0 / h);
    }
    case PropensityFamily::kDirectTable:
      break;
  }
  return std::nullopt;
}

std::vector<double> PropensityAssignment::inverse() const {
  std::vector<double> w(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) w[j] = 1.0 / p[j];
  return w;
}

PropensityAssignment assign(const PropensityModelSpec& spec,
                            const LabelPriors& priors) {
  PropensityAssignment out;
  out.source = to_kv(spec);
  const std::size_t m = priors.m();
  out.p.resize(m);
  const auto& par = spec.params;
  auto need = [&](std::size_t count) {
    if (par.size() < count) {
      throw std::invalid_argument(std::string(family_name(spec.family)) +
                                  ": expected " + std::to_string(count) +
                                  " parameters");
    }
  };
  for (std::size_t j = 0; j < m; ++j) {
    const double prior = priors.priors[j];
    try {
      switch (spec.family) {
        case PropensityFamily::kConstant:
          need(1);
          out.p[j] = clamp_propensity(par[0]);
          break;
        case PropensityFamily::kJpv: {
          need(3);
          const double n =
              par[2] > 0 ? par[2] : static_cast<double>(priors.n);
          const auto v = eval_jpv(prior, n, par[0], par[1]);
          out.p[j] = v.value;
          if (v.degenerate) ++out.degenerate_labels;
          break;
        }
        case PropensityFamily::kPowerLaw:
          need(2);
          out.p[j] = eval_power(prior, par[0], par[1]);
          break;
        case PropensityFamily::kRichards:
          need(6);
          out.p[j] = eval_richards(
              prior, {par[0], par[1], par[2], par[3], par[4], par[5]});
          break;
        case PropensityFamily::kDirectTable:
          if (par.size() != m) {
            throw std::invalid_argument(
                "direct table has " + std::to_string(par.size()) +
                " entries for " + std::to_string(m) + " labels");
          }
          out.p[j] = clamp_propensity(par[j]);
          break;
      }
    } catch (const std::domain_error& e) {
      throw std::domain_error(std::string(e.what()) + " (label " +
                              std::to_string(j) + ")");
    }
  }
  return out;
}

PropensityAssignment direct_estimate(const LabelPriors& train,
                                     const LabelPriors& val,
                                     std::span<const double> p_controlled) {
  const std::size_t m = train.m();
  if (val.m() != m || p_controlled.size() != m) {
    throw std::invalid_argument("direct_estimate: label counts differ");
  }
  PropensityAssignment out;
  out.source = "direct";
  out.p.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(val.priors[j] > 0.0)) {
      throw std::domain_error("direct_estimate: validation prior of label " +
                              std::to_string(j) + " is zero");
    }
    if (!(p_controlled[j] > 0.0 && p_controlled[j] <= 1.0)) {
      throw std::invalid_argument("direct_estimate: controlled propensity of label " +
                                  std::to_string(j) + " outside (0, 1]");
    }
    out.p[j] =
        clamp_propensity(train.priors[j] * p_controlled[j] / val.priors[j]);
  }
  return out;
}

PropensityAssignment direct_estimate(const LabelPriors& train,
                                     const LabelPriors& val,
                                     double p_controlled) {
  const std::vector<double> pc(train.m(), p_controlled);
  return direct_estimate(train, val, pc);
}

double adjust_probability(double eta_observed, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument("adjust_probability: p outside (0, 1]");
  }
  return std::min(eta_observed / p, 1.0);
}

namespace {

ScalingReport summarize(std::vector<ScalingPoint> points) {
  ScalingReport r;
  r.points = std::move(points);
  if (r.points.empty()) return r;
  std::size_t from = r.points.size() - 1;
  while (from > 0 && r.points[from - 1].p <= r.points[from].p) --from;
  r.increasing_from = from;
  r.terminal = r.points.back().p;
  r.eventually_increasing =
      r.points.size() >= 2 && r.points.back().p > r.points[from].p;
  return r;
}

void check_grid(std::span<const double> n_grid) {
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 3.0 || (i > 0 && n_grid[i] < n_grid[i - 1])) {
      throw std::invalid_argument(
          "scaling grid must be ascending with every n >= 3");
    }
  }
}

}  // namespace

ScalingReport scaling_diagnostic(double a, double b, double prior,
                                 std::span<const double> n_grid) {
  check_grid(n_grid);
  std::vector<ScalingPoint> pts;
  pts.reserve(n_grid.size());
  for (double n : n_grid) pts.push_back({n, eval_jpv(prior, n, a, b).value});
  return summarize(std::move(pts));
}

ScalingReport scaling_diagnostic(const PropensityModelSpec& spec, double prior,
                                 std::span<const double> n_grid) {
  check_grid(n_grid);
  std::vector<ScalingPoint> pts;
  pts.reserve(n_grid.size());
  for (double n : n_grid) {
    PropensityModelSpec s = spec;
    if (s.family == PropensityFamily::kJpv) s.params.at(2) = n;
    LabelPriors one;
    one.n = static_cast<std::size_t>(n);
    one.priors = {prior};
    one.counts = {0};
    pts.push_back({n, assign(s, one).p[0]});
  }
  return summarize(std::move(pts));
}

}  // namespace xprop
