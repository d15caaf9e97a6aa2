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

#include "embclust/louvain.hpp"
#include "embclust/synth.hpp"

namespace {

void BM_Louvain(benchmark::State& state) {
  embclust::MixtureSpec spec;
  spec.n_items = static_cast<std::size_t>(state.range(0));
  spec.dim = 32;
  spec.separation = static_cast<double>(state.range(1));
  spec.seed = 3;
  const auto g = embclust::planted_graph(spec, embclust::kDefaultKnnK).graph;
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::louvain_cluster(g));
  }
  state.counters["edges"] = static_cast<double>(g.n_edges());
}
BENCHMARK(BM_Louvain)
    ->ArgNames({"n", "sep"})
    ->Args({10000, 10})
    ->Args({10000, 2})
    ->Args({50000, 10})
    ->Unit(benchmark::kMillisecond);

void BM_Modularity(benchmark::State& state) {
  embclust::MixtureSpec spec;
  spec.n_items = 20000;
  spec.dim = 16;
  const auto pg = embclust::planted_graph(spec, embclust::kDefaultKnnK);
  const auto part = embclust::Partition(
      std::vector<std::uint32_t>(pg.labels.labels().begin(), pg.labels.labels().end()), pg.labels.n_classes());
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::modularity(pg.graph, part));
  }
}
BENCHMARK(BM_Modularity)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
