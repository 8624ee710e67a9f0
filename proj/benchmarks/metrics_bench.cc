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

#include <benchmark/benchmark.h>

#include <sstream>

#include "xprop/datagen.h"
#include "xprop/dataset.h"
#include "xprop/metrics.h"
#include "xprop/rng.h"

namespace xprop {
namespace {

PredictionMatrix random_scores(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  PredictionMatrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out.at(i, j) = rng.uniform();
  }
  return out;
}

HyperBallData bench_data(std::size_t m, std::size_t n) {
  HyperBallConfig c;
  c.m = m;
  c.n_train = n;
  c.n_val = 1;
  c.n_test = 1;
  return generate_hyperball(c);
}

void BM_TopK(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto scores = random_scores(1, m, 1);
  const std::vector<double> row(scores.row(0).begin(), scores.row(0).end());
  for (auto _ : state) benchmark::DoNotOptimize(top_k(row, 5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TopK)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_PsPrecision(benchmark::State& state) {
  const auto data = bench_data(100, static_cast<std::size_t>(state.range(0)));
  const auto scores = random_scores(data.train.n(), 100, 2);
  const auto p = assign(PropensityModelSpec::jpv_default(), data.true_priors);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ps_precision_at_k(data.train.labels, scores, 5, p).value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PsPrecision)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_NormalizedPsp(benchmark::State& state) {
  const auto data = bench_data(100, 5000);
  const auto scores = random_scores(data.train.n(), 100, 3);
  const auto p = assign(PropensityModelSpec::jpv_default(), data.true_priors);
  for (auto _ : state) {
    benchmark::DoNotOptimize(normalized_psp_at_k(data.train.labels, scores, 5, p).value);
  }
}
BENCHMARK(BM_NormalizedPsp)->Unit(benchmark::kMillisecond);

void BM_ParseXmlc(benchmark::State& state) {
  const auto text = to_xmlc_string(bench_data(100, static_cast<std::size_t>(state.range(0))).train);
  for (auto _ : state) benchmark::DoNotOptimize(parse_xmlc(text).n());
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseXmlc)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_InjectMissing(benchmark::State& state) {
  const auto data = bench_data(100, 10000);
  const auto p = assign(PropensityModelSpec::jpv_default(), data.true_priors);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(inject_missing(data.train, p, ++seed).trace.kept);
}
BENCHMARK(BM_InjectMissing)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace xprop
