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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "embclust/error.hpp"
#include "embclust/louvain.hpp"
#include "embclust/metrics.hpp"
#include "embclust/synth.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace embclust;

namespace {

std::vector<oracle::WEdge> to_oracle(const KnnGraph& g) {
  std::vector<oracle::WEdge> out;
  for (const auto& e : g.edges()) {
    out.push_back({e.u, e.v, e.weight});
  }
  return out;
}

std::vector<std::uint32_t> to_vec(const Partition& p) {
  return {p.assignment().begin(), p.assignment().end()};
}

/// Two 5-cliques joined by the single edge 4-5.
KnnGraph barbell() {
  std::vector<Edge> e;
  for (std::uint32_t base : {0u, 5u}) {
    for (std::uint32_t i = 0; i < 5; ++i) {
      for (std::uint32_t j = i + 1; j < 5; ++j) {
        e.push_back({base + i, base + j, 1.0});
      }
    }
  }
  e.push_back({4, 5, 1.0});
  return KnnGraph(10, e);
}

KnnGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> e;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (u(rng) < p) {
        e.push_back({i, j, 0.1 + u(rng)});
      }
    }
  }
  return KnnGraph(n, e);
}

}  // namespace

TEST(Louvain, BarbellSplitsIntoCliques) {
  const auto g = barbell();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    LouvainParams p;
    p.seed = seed;
    const auto r = louvain_cluster(g, p);
    ASSERT_EQ(r.final_partition.n_clusters(), 2u);
    for (std::uint32_t i = 1; i < 5; ++i) {
      EXPECT_EQ(r.final_partition[i], r.final_partition[0]);
      EXPECT_EQ(r.final_partition[5 + i], r.final_partition[5]);
    }
    // Exhaustive search over all set partitions gives 19/42 as the optimum.
    EXPECT_NEAR(modularity(g, r.final_partition), 19.0 / 42.0, 1e-12);
    EXPECT_NEAR(r.modularity_trace.back(), 19.0 / 42.0, 1e-12);
  }
}

TEST(Louvain, TriangleIsOneCommunity) {
  const KnnGraph g(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  const auto r = louvain_cluster(g);
  EXPECT_EQ(r.final_partition.n_clusters(), 1u);
  EXPECT_NEAR(r.modularity_trace.back(), 0.0, 1e-15);
}

TEST(Louvain, EdgelessGraphGivesSingletons) {
  const auto r = louvain_cluster(KnnGraph(4, {}));
  EXPECT_EQ(r.final_partition.n_clusters(), 4u);
  EXPECT_EQ(r.modularity_trace, std::vector<double>{0.0});
  EXPECT_THROW(louvain_cluster(KnnGraph(0, {})), DataError);
}

TEST(Louvain, RejectsNonPositiveResolution) {
  LouvainParams p;
  p.resolution = 0.0;
  EXPECT_THROW(louvain_cluster(barbell(), p), ConfigError);
}

TEST(Louvain, PredictedGainsMatchOracleModularity) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto g = random_graph(40, 0.12, seed);
    const auto edges = to_oracle(g);
    for (double gamma : {0.5, 1.0, 2.0}) {
      std::vector<std::uint32_t> before(g.n_nodes());
      for (std::uint32_t i = 0; i < before.size(); ++i) {
        before[i] = i;
      }
      double q_before = oracle::modularity(g.n_nodes(), edges, before, gamma);
      std::size_t audited = 0;
      LouvainParams p;
      p.seed = seed;
      p.resolution = gamma;
      p.on_move = [&](const LouvainMove& m) {
        std::vector<std::uint32_t> after(g.n_nodes());
        for (std::size_t i = 0; i < after.size(); ++i) {
          after[i] = m.community[m.node_of_original[i]];
        }
        const double q_after = oracle::modularity(g.n_nodes(), edges, after, gamma);
        // Contraction preserves Q, so the chain continues across passes.
        EXPECT_GT(m.gain, 0.0);
        EXPECT_NEAR(q_after - q_before, m.gain, 1e-9) << "seed " << seed << " pass " << m.pass;
        ++audited;
        q_before = q_after;
      };
      const auto r = louvain_cluster(g, p);
      EXPECT_GT(audited, 0u);
      EXPECT_NEAR(r.modularity_trace.back(),
                  oracle::modularity(g.n_nodes(), edges, to_vec(r.final_partition), gamma), 1e-9);
    }
  }
}

TEST(Louvain, TraceIncreasesAndLevelsRefine) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = planted_graph({6, 600, 8, 4.0, {}, SizeMode::quota, seed}, 10).graph;
    LouvainParams p;
    p.seed = seed;
    const auto r = louvain_cluster(g, p);
    ASSERT_EQ(r.levels.size(), r.modularity_trace.size());
    for (std::size_t i = 1; i < r.modularity_trace.size(); ++i) {
      EXPECT_GT(r.modularity_trace[i], r.modularity_trace[i - 1]);
      EXPECT_TRUE(r.levels[i - 1].refines(r.levels[i]));
      EXPECT_LE(r.levels[i].n_clusters(), r.levels[i - 1].n_clusters());
    }
    EXPECT_EQ(r.levels.back(), r.final_partition);
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
      EXPECT_NEAR(modularity(g, r.levels[i]), r.modularity_trace[i], 1e-9);
    }
  }
}

TEST(Louvain, DeterministicForSeed) {
  const auto g = random_graph(150, 0.05, 77);
  LouvainParams p;
  p.seed = 5;
  const auto a = louvain_cluster(g, p);
  const auto b = louvain_cluster(g, p);
  EXPECT_EQ(a.final_partition, b.final_partition);
  EXPECT_EQ(a.modularity_trace, b.modularity_trace);
}

TEST(Louvain, ResolutionControlsGranularity) {
  const auto g = random_graph(120, 0.08, 3);
  LouvainParams coarse;
  coarse.resolution = 0.01;
  LouvainParams fine;
  fine.resolution = 100.0;
  const auto a = louvain_cluster(g, coarse);
  const auto b = louvain_cluster(g, fine);
  EXPECT_LE(a.final_partition.n_clusters(), 3u);
  EXPECT_GE(b.final_partition.n_clusters(), 60u);
}

TEST(Modularity, DisjointCliques) {
  std::vector<Edge> e = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}, {3, 5, 1.0}, {4, 5, 1.0}};
  const KnnGraph g(6, e);
  EXPECT_NEAR(modularity(g, Partition({0, 0, 0, 1, 1, 1}, 2)), 0.5, 1e-15);
  EXPECT_NEAR(modularity(g, Partition({0, 0, 0, 0, 0, 0}, 1)), 0.0, 1e-15);
  EXPECT_THROW(modularity(g, Partition({0, 0}, 1)), DataError);
}

TEST(Modularity, MatchesOracleOnRandomPartitions) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_graph(30, 0.2, 1000 + trial);
    const std::uint32_t k = 1 + rng() % 6;
    std::vector<std::uint32_t> raw(30);
    for (auto& x : raw) {
      x = static_cast<std::uint32_t>(rng() % k);
    }
    const auto part = Partition::from_labels(raw);
    const double gamma = 0.25 + static_cast<double>(trial % 8) * 0.25;
    EXPECT_NEAR(modularity(g, part, gamma), oracle::modularity(30, to_oracle(g), raw, gamma), 1e-9);
  }
}

TEST(Hierarchy, FlattenAndSave) {
  testing_support::TempDir dir;
  const auto g = planted_graph({4, 300, 6, 6.0, {}, SizeMode::quota, 2}, 8).graph;
  const auto r = louvain_cluster(g);
  EXPECT_EQ(flatten_level(r, 0), r.levels[0]);
  EXPECT_THROW(flatten_level(r, r.n_passes()), ConfigError);
  save_hierarchy(r, dir.path());
  for (std::size_t i = 0; i < r.n_passes(); ++i) {
    EXPECT_EQ(load_partition(dir / ("level_" + std::to_string(i) + ".txt")), r.levels[i]);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "hierarchy.json"));
}

TEST(Louvain, RecoversSyntheticBlobs) {
  const auto planted = planted_graph({5, 1000, 32, 10.0, {}, SizeMode::quota, 1}, 10);
  const auto r = louvain_cluster(planted.graph);
  EXPECT_GE(r.final_partition.n_clusters(), 5u);
  EXPECT_LE(r.final_partition.n_clusters(), 25u);
  EXPECT_GE(purity(r.final_partition, planted.labels), 0.95);
}
