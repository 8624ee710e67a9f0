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

#include "xprop/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "xprop/numeric.h"
#include "xprop/rng.h"

namespace xprop {

std::vector<std::uint32_t> top_k(std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > scores.size()) {
    throw std::invalid_argument("top_k: k must be in [1, m]");
  }
  std::vector<std::uint32_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                    idx.end(), [&](std::uint32_t a, std::uint32_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

namespace {

bool contains(const LabelSet& labels, std::uint32_t j) {
  return std::binary_search(labels.begin(), labels.end(), j);
}

void check_shapes(const LabelRows& labels, const PredictionMatrix& scores,
                  std::size_t k) {
  if (labels.size() != scores.n()) {
    throw std::invalid_argument("metric: label rows and score rows differ");
  }
  if (k < 1 || k > scores.m()) {
    throw std::invalid_argument("metric: k must be in [1, m]");
  }
}

double dcg_normalizer(std::size_t k) {
  double z = 0;
  for (std::size_t r = 1; r <= k; ++r) z += 1.0 / std::log(static_cast<double>(r) + 1.0);
  return z;
}

enum class Normalizer { kCutoff, kRelevantCount, kDcg };

// Shared kernel: per instance, sum over top-k hits of weight_j * discount(rank)
// divided by the normalizer. `weights` empty means unit weights.
MetricValue ranked_gain(std::string name, const LabelRows& labels,
                        const PredictionMatrix& scores, std::size_t k,
                        std::span<const double> weights, bool discounted,
                        Normalizer norm) {
  check_shapes(labels, scores, k);
  if (!weights.empty() && weights.size() != scores.m()) {
    throw std::invalid_argument("metric: weight vector length differs from m");
  }
  MetricValue out;
  out.name = std::move(name);
  out.k = k;
  const double dcg_z = discounted ? dcg_normalizer(k) : 0.0;
  for (std::size_t i = 0; i < scores.n(); ++i) {
    const auto& y = labels[i];
    if (norm == Normalizer::kRelevantCount && y.empty()) {
      ++out.skipped;
      continue;
    }
    const auto top = top_k(scores.row(i), k);
    double gain = 0;
    for (std::size_t r = 0; r < top.size(); ++r) {
      if (!contains(y, top[r])) continue;
      double g = weights.empty() ? 1.0 : weights[top[r]];
      if (discounted) g /= std::log(static_cast<double>(r) + 2.0);
      gain += g;
    }
    switch (norm) {
      case Normalizer::kCutoff: gain /= static_cast<double>(k); break;
      case Normalizer::kRelevantCount: gain /= static_cast<double>(y.size()); break;
      case Normalizer::kDcg: gain /= dcg_z; break;
    }
    out.per_instance.push_back(gain);
  }
  out.n_evaluated = out.per_instance.size();
  out.value = mean(out.per_instance);
  return out;
}

std::vector<double> inverse_propensities(const PropensityAssignment& p,
                                         std::size_t m) {
  if (p.m() != m) {
    throw std::invalid_argument("metric: propensity vector length differs from m");
  }
  return p.inverse();
}

}  // namespace

MetricValue precision_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                           std::size_t k) {
  return ranked_gain("P", labels, scores, k, {}, false, Normalizer::kCutoff);
}

MetricValue recall_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                        std::size_t k) {
  return ranked_gain("R", labels, scores, k, {}, false,
                     Normalizer::kRelevantCount);
}

MetricValue ndcg_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                      std::size_t k) {
  return ranked_gain("nDCG", labels, scores, k, {}, true, Normalizer::kDcg);
}

MetricValue ps_precision_at_k(const LabelRows& observed,
                              const PredictionMatrix& scores, std::size_t k,
                              const PropensityAssignment& p) {
  const auto w = inverse_propensities(p, scores.m());
  return ranked_gain("PSP", observed, scores, k, w, false, Normalizer::kCutoff);
}

MetricValue ps_recall_at_k(const LabelRows& observed,
                           const PredictionMatrix& scores, std::size_t k,
                           const PropensityAssignment& p) {
  const auto w = inverse_propensities(p, scores.m());
  return ranked_gain("PSR", observed, scores, k, w, false,
                     Normalizer::kRelevantCount);
}

MetricValue ps_ndcg_at_k(const LabelRows& observed, const PredictionMatrix& scores,
                         std::size_t k, const PropensityAssignment& p) {
  const auto w = inverse_propensities(p, scores.m());
  return ranked_gain("PSnDCG", observed, scores, k, w, true, Normalizer::kDcg);
}

MetricValue weighted_precision_at_k(const LabelRows& labels,
                                    const PredictionMatrix& scores, std::size_t k,
                                    std::span<const double> weights) {
  if (weights.size() != scores.m()) {
    throw std::invalid_argument("metric: weight vector length differs from m");
  }
  return ranked_gain("WP", labels, scores, k, weights, false,
                     Normalizer::kCutoff);
}

MetricValue normalized_psp_at_k(const LabelRows& observed,
                                const PredictionMatrix& scores, std::size_t k,
                                const PropensityAssignment& p) {
  const auto raw = ps_precision_at_k(observed, scores, k, p);
  const auto w = p.inverse();
  std::vector<double> best(observed.size(), 0.0);
  std::vector<double> inv;
  MetricValue out;
  out.name = "nPSP";
  out.k = k;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i].empty()) {
      ++out.skipped;
      continue;
    }
    inv.clear();
    for (auto j : observed[i]) inv.push_back(w[j]);
    const std::size_t take = std::min(k, inv.size());
    std::partial_sort(inv.begin(), inv.begin() + static_cast<std::ptrdiff_t>(take),
                      inv.end(), std::greater<>());
    double s = 0;
    for (std::size_t t = 0; t < take; ++t) s += inv[t];
    best[i] = s / static_cast<double>(k);
  }
  const double denom = pairwise_sum(best);
  if (!(denom > 0.0)) throw std::domain_error("normalized PSP: normalizer is zero");
  out.n_evaluated = observed.size() - out.skipped;
  out.value = pairwise_sum(raw.per_instance) / denom;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!observed[i].empty()) out.per_instance.push_back(raw.per_instance[i] / best[i]);
  }
  return out;
}

MetricValue macro_f_beta(const LabelRows& labels, const LabelRows& predicted,
                         std::size_t m, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("macro F: beta must be > 0");
  if (labels.size() != predicted.size()) {
    throw std::invalid_argument("macro F: label and prediction rows differ");
  }
  std::vector<double> tp(m, 0), pos(m, 0), pred(m, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (auto j : labels[i]) {
      if (j >= m) throw std::invalid_argument("macro F: label index >= m");
      pos[j] += 1;
    }
    for (auto j : predicted[i]) {
      if (j >= m) throw std::invalid_argument("macro F: prediction index >= m");
      pred[j] += 1;
      if (contains(labels[i], j)) tp[j] += 1;
    }
  }
  const double b2 = beta * beta;
  std::vector<double> per_label(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double denom = b2 * pos[j] + pred[j];
    per_label[j] = denom > 0 ? (1 + b2) * tp[j] / denom : 0.0;
  }
  // Summed in sorted order so the value does not depend on label order.
  std::vector<double> sorted = per_label;
  std::sort(sorted.begin(), sorted.end());
  MetricValue out;
  out.name = "MacroF";
  out.value = m > 0 ? pairwise_sum(sorted) / static_cast<double>(m) : 0.0;
  out.n_evaluated = labels.size();
  return out;
}

MetricValue macro_f_beta_at_k(const LabelRows& labels,
                              const PredictionMatrix& scores, std::size_t k,
                              double beta) {
  check_shapes(labels, scores, k);
  LabelRows predicted(scores.n());
  for (std::size_t i = 0; i < scores.n(); ++i) {
    auto top = top_k(scores.row(i), k);
    std::sort(top.begin(), top.end());
    predicted[i] = std::move(top);
  }
  auto out = macro_f_beta(labels, predicted, scores.m(), beta);
  out.k = k;
  return out;
}

MetricValue abandonment_at_k(const LabelRows& labels,
                             const PredictionMatrix& scores, std::size_t k) {
  check_shapes(labels, scores, k);
  MetricValue out;
  out.name = "Abandonment";
  out.k = k;
  for (std::size_t i = 0; i < scores.n(); ++i) {
    const auto top = top_k(scores.row(i), k);
    const bool hit = std::any_of(top.begin(), top.end(), [&](std::uint32_t j) {
      return contains(labels[i], j);
    });
    out.per_instance.push_back(hit ? 0.0 : 1.0);
  }
  out.n_evaluated = out.per_instance.size();
  out.value = mean(out.per_instance);
  return out;
}

MetricValue coverage_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                          std::size_t k) {
  check_shapes(labels, scores, k);
  std::vector<char> covered(scores.m(), 0);
  for (std::size_t i = 0; i < scores.n(); ++i) {
    for (auto j : top_k(scores.row(i), k)) {
      if (contains(labels[i], j)) covered[j] = 1;
    }
  }
  MetricValue out;
  out.name = "Coverage";
  out.k = k;
  out.n_evaluated = scores.n();
  out.value = static_cast<double>(std::count(covered.begin(), covered.end(), 1)) /
              static_cast<double>(scores.m());
  return out;
}

double bootstrap_standard_error(std::span<const double> values,
                                std::size_t resamples, std::uint64_t seed) {
  if (values.size() < 2 || resamples < 2) return 0.0;
  Rng rng = Rng::derive(seed, "bootstrap");
  std::vector<double> means(resamples);
  std::vector<double> draw(values.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& v : draw) v = values[rng.below(values.size())];
    means[b] = mean(draw);
  }
  const double mu = mean(means);
  std::vector<double> sq(resamples);
  for (std::size_t b = 0; b < resamples; ++b) sq[b] = (means[b] - mu) * (means[b] - mu);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(resamples - 1));
}

}  // namespace xprop
