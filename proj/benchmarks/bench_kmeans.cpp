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

#include "embclust/kmeans.hpp"
#include "embclust/synth.hpp"

namespace {

void BM_KmeansFit(benchmark::State& state) {
  embclust::MixtureSpec spec;
  spec.n_clusters = static_cast<std::size_t>(state.range(1));
  spec.n_items = static_cast<std::size_t>(state.range(0));
  spec.dim = 128;
  spec.seed = 2;
  const auto m = embclust::generate(spec).embeddings;
  embclust::KmeansParams p;
  p.k = spec.n_clusters;
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::kmeans_fit(m, p));
  }
}
BENCHMARK(BM_KmeansFit)
    ->ArgNames({"n", "k"})
    ->Args({10000, 5})
    ->Args({10000, 50})
    ->Args({100000, 5})
    ->Unit(benchmark::kMillisecond);

void BM_Assign(benchmark::State& state) {
  embclust::MixtureSpec spec;
  spec.n_items = 20000;
  spec.dim = 128;
  const auto m = embclust::generate(spec).embeddings;
  embclust::KmeansParams p;
  p.k = static_cast<std::size_t>(state.range(0));
  p.n_init = 1;
  p.max_iter = 1;
  const auto model = embclust::kmeans_fit(m, p).model;
  for (auto _ : state) {
    benchmark::DoNotOptimize(embclust::assign(model, m));
  }
}
BENCHMARK(BM_Assign)->ArgName("k")->Arg(5)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
