// Copyright 2026 The embclust Authors
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

#include <random>

#include "embclust/metrics.hpp"
#include "embclust/summarize.hpp"
#include "embclust/synth.hpp"

namespace {

void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::vector<std::uint32_t> pred(n), truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = static_cast<std::uint32_t>(rng() % 50);
    truth[i] = static_cast<std::uint32_t>(rng() % 20);
  }
  const auto p = embclust::Partition::from_labels(pred);
  const embclust::LabelSet t(truth, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::evaluate(p, t));
  }
}
BENCHMARK(BM_Evaluate)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMicrosecond);

void BM_ClusterBigrams(benchmark::State& state) {
  embclust::MixtureSpec spec;
  spec.n_items = static_cast<std::size_t>(state.range(0));
  spec.dim = 4;
  const auto data = embclust::generate(spec);
  const auto part = embclust::Partition(
      std::vector<std::uint32_t>(data.labels.labels().begin(), data.labels.labels().end()),
      data.labels.n_classes());
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::cluster_bigrams(data.corpus, part, embclust::default_stopwords()));
  }
}
BENCHMARK(BM_ClusterBigrams)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
