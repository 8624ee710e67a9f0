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
#include <span>
#include <string>
#include <vector>

#include "xprop/dataset.h"
#include "xprop/propensity.h"

namespace xprop {

// Dense row-major n x m score matrix.
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  PredictionMatrix(std::size_t n, std::size_t m, double fill = 0.0)
      : n_(n), m_(m), data_(n * m, fill) {}

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * m_, m_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * m_, m_}; }
  double& at(std::size_t i, std::size_t j) { return data_[i * m_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * m_ + j]; }

  bool operator==(const PredictionMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> data_;
};

// Indices of the k largest scores in descending order; ties go to the lower
// index. Requires 1 <= k <= scores.size().
std::vector<std::uint32_t> top_k(std::span<const double> scores, std::size_t k);

struct MetricValue {
  std::string name;
  std::size_t k = 0;  // 0 when the metric has no cutoff
  double value = 0;
  std::size_t n_evaluated = 0;
  std::size_t skipped = 0;
  // Per evaluated instance, in instance order (empty for label-level metrics).
  std::vector<double> per_instance;
};

using LabelRows = std::vector<LabelSet>;

MetricValue precision_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                           std::size_t k);
// Instances without relevant labels are skipped.
MetricValue recall_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                        std::size_t k);
// Natural-log discount 1 / ln(rank + 1); fixed normalizer over ranks 1..k.
MetricValue ndcg_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                      std::size_t k);

// Propensity-scored variants: each observed hit j counts 1 / p_j.
MetricValue ps_precision_at_k(const LabelRows& observed,
                              const PredictionMatrix& scores, std::size_t k,
                              const PropensityAssignment& p);
// Normalizes by the observed label count (the true count is unknown).
MetricValue ps_recall_at_k(const LabelRows& observed,
                           const PredictionMatrix& scores, std::size_t k,
                           const PropensityAssignment& p);
MetricValue ps_ndcg_at_k(const LabelRows& observed, const PredictionMatrix& scores,
                         std::size_t k, const PropensityAssignment& p);

// PSP@k divided by the best PSP@k any prediction could reach on the same
// observed labels. Throws std::domain_error if no instance has a label.
MetricValue normalized_psp_at_k(const LabelRows& observed,
                                const PredictionMatrix& scores, std::size_t k,
                                const PropensityAssignment& p);

// (1/k) sum over top-k hits of w_j.
MetricValue weighted_precision_at_k(const LabelRows& labels,
                                    const PredictionMatrix& scores, std::size_t k,
                                    std::span<const double> weights);

// Macro-averaged F-beta over m labels; labels with a zero denominator add 0.
MetricValue macro_f_beta(const LabelRows& labels, const LabelRows& predicted,
                         std::size_t m, double beta);
// Predictions are the top-k labels of every instance.
MetricValue macro_f_beta_at_k(const LabelRows& labels,
                              const PredictionMatrix& scores, std::size_t k,
                              double beta);

// Fraction of instances whose top-k holds no relevant label.
MetricValue abandonment_at_k(const LabelRows& labels,
                             const PredictionMatrix& scores, std::size_t k);
// Fraction of labels with at least one correct top-k prediction.
MetricValue coverage_at_k(const LabelRows& labels, const PredictionMatrix& scores,
                          std::size_t k);

// Standard deviation of the mean over bootstrap resamples of `values`.
double bootstrap_standard_error(std::span<const double> values,
                                std::size_t resamples, std::uint64_t seed);

}  // namespace xprop
