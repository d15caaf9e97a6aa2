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

#include "embclust/knn.hpp"
#include "embclust/parallel.hpp"
#include "embclust/synth.hpp"

namespace {

embclust::EmbeddingMatrix mixture(std::size_t n, std::size_t d) {
  embclust::MixtureSpec spec;
  spec.n_items = n;
  spec.dim = d;
  spec.seed = 1;
  return embclust::generate(spec).embeddings;
}

void BM_KnnSearch(benchmark::State& state) {
  const auto m = mixture(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  embclust::parallel::ThreadScope threads(static_cast<int>(state.range(2)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::knn_search(m, embclust::kDefaultKnnK));
  }
  const double pairs = static_cast<double>(m.n_items()) * static_cast<double>(m.n_items());
  state.counters["pairs/s"] = benchmark::Counter(pairs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_KnnSearch)
    ->ArgNames({"n", "d", "threads"})
    ->Args({2000, 128, 1})
    ->Args({10000, 128, 1})
    ->Args({10000, 128, 8})
    ->Args({10000, 768, 1})
    ->Unit(benchmark::kMillisecond);

void BM_KnnBlockSize(benchmark::State& state) {
  const auto m = mixture(5000, 128);
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::knn_search(m, embclust::kDefaultKnnK, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_KnnBlockSize)->ArgName("block")->Arg(16)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_BuildGraph(benchmark::State& state) {
  const auto nn = embclust::knn_search(mixture(10000, 64), embclust::kDefaultKnnK);
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::build_graph(nn, {}));
  }
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
