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
#include <numeric>
#include <random>

#include "embclust/distance.hpp"
#include "embclust/error.hpp"
#include "embclust/knn.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace embclust;

namespace {

EmbeddingMatrix to_matrix(const oracle::Matrix& m) {
  return EmbeddingMatrix(m.size(), m.front().size(), oracle::flatten(m));
}

}  // namespace

TEST(Knn, CollinearPoints) {
  const EmbeddingMatrix m(3, 1, {0.0f, 1.0f, 10.0f});
  const auto nn = knn_search(m, 1);
  EXPECT_EQ(nn.of(0)[0], (Neighbor{1, 1.0f}));
  EXPECT_EQ(nn.of(1)[0], (Neighbor{0, 1.0f}));
  EXPECT_EQ(nn.of(2)[0], (Neighbor{1, 9.0f}));
}

TEST(Knn, TiesBreakByLowerId) {
  const EmbeddingMatrix m(3, 1, {-1.0f, 0.0f, 1.0f});
  const auto nn = knn_search(m, 2);
  EXPECT_EQ(nn.of(1)[0].id, 0u);
  EXPECT_EQ(nn.of(1)[1].id, 2u);
}

TEST(Knn, FullNeighborhoodListsEveryOtherRow) {
  const auto raw = oracle::random_gaussian(40, 5, 2);
  const auto nn = knn_search(to_matrix(raw), 39);
  for (std::size_t q = 0; q < 40; ++q) {
    std::vector<bool> seen(40, false);
    for (const auto& nb : nn.of(q)) {
      EXPECT_NE(nb.id, q);
      EXPECT_FALSE(seen[nb.id]);
      seen[nb.id] = true;
    }
  }
}

TEST(Knn, MatchesTwoLoopOracle) {
  const auto raw = oracle::random_gaussian(500, 32, 3);
  const auto expected = oracle::knn(raw, 10);
  const auto nn = knn_search(to_matrix(raw), 10);
  for (std::size_t q = 0; q < raw.size(); ++q) {
    for (std::size_t j = 0; j < 10; ++j) {
      ASSERT_EQ(nn.of(q)[j].id, expected[q][j].second) << "query " << q << " rank " << j;
      EXPECT_NEAR(nn.of(q)[j].distance, expected[q][j].first, 1e-5 * (1.0 + expected[q][j].first));
    }
  }
}

TEST(Knn, ResultIndependentOfBlockSize) {
  const auto raw = oracle::random_gaussian(300, 17, 4);
  const auto m = to_matrix(raw);
  const auto ref = knn_search(m, 7, 300);
  for (std::size_t b : {1, 7, 64, 256}) {
    const auto nn = knn_search(m, 7, b);
    ASSERT_TRUE(std::equal(ref.data().begin(), ref.data().end(), nn.data().begin())) << "block " << b;
  }
}

TEST(Knn, PermutationEquivariant) {
  const auto raw = oracle::random_gaussian(200, 9, 5);
  std::vector<std::size_t> perm(raw.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
  oracle::Matrix shuffled(raw.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled[i] = raw[perm[i]];
  }
  const auto a = knn_search(to_matrix(raw), 5);
  const auto b = knn_search(to_matrix(shuffled), 5);
  // Random Gaussian data has no distance ties, so neighbor sets map exactly.
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(perm[b.of(i)[j].id], a.of(perm[i])[j].id);
      EXPECT_FLOAT_EQ(b.of(i)[j].distance, a.of(perm[i])[j].distance);
    }
  }
}

TEST(Knn, DistancesSortedAndPrefixStable) {
  const auto m = to_matrix(oracle::random_gaussian(150, 12, 6));
  const auto small = knn_search(m, 4);
  const auto large = knn_search(m, 12);
  for (std::size_t q = 0; q < 150; ++q) {
    for (std::size_t j = 1; j < 12; ++j) {
      EXPECT_LE(large.of(q)[j - 1].distance, large.of(q)[j].distance);
    }
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(small.of(q)[j], large.of(q)[j]);
    }
  }
}

TEST(Knn, DuplicatePointsHaveZeroDistance) {
  const EmbeddingMatrix m(4, 2, {1, 1, 1, 1, 5, 5, 1, 1});
  const auto nn = knn_search(m, 1);
  EXPECT_EQ(nn.of(0)[0], (Neighbor{1, 0.0f}));
  EXPECT_EQ(nn.of(3)[0], (Neighbor{0, 0.0f}));
}

TEST(Knn, LargeMagnitudesStayAccurate) {
  // Norm expansion cancels badly here; the exact re-score must recover.
  const EmbeddingMatrix m(3, 2, {1000.0f, 1000.0f, 1000.5f, 1000.0f, 1003.0f, 1000.0f});
  const auto nn = knn_search(m, 1);
  EXPECT_EQ(nn.of(0)[0], (Neighbor{1, 0.5f}));
  EXPECT_EQ(nn.of(2)[0], (Neighbor{1, 2.5f}));
}

TEST(Knn, RejectsBadParameters) {
  const EmbeddingMatrix m(3, 1, {0, 1, 2});
  EXPECT_THROW(knn_search(m, 0), ConfigError);
  EXPECT_THROW(knn_search(m, 3), ConfigError);
  EXPECT_THROW(knn_search(m, 1, 0), ConfigError);
  const EmbeddingMatrix one(1, 1, {0});
  EXPECT_THROW(knn_search(one, 1), ConfigError);
}

TEST(Kernel, DotPanelMatchesDirectSums) {
  const auto raw = oracle::random_gaussian(37, 13, 8);
  const auto m = to_matrix(raw);
  const auto direct = kernel::squared_norms(m.values(), m.n_items(), m.dim());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double s = 0.0;
    for (double x : raw[i]) {
      s += x * x;
    }
    EXPECT_NEAR(direct[i], s, 1e-4 * (1.0 + s));
    EXPECT_NEAR(kernel::exact_squared_distance(m.row(i), m.row(0)),
                oracle::l2(raw[i], raw[0]) * oracle::l2(raw[i], raw[0]), 1e-9);
  }
}

TEST(Graph, TwoPointsGiveOneEdge) {
  const EmbeddingMatrix m(2, 1, {0.0f, 2.0f});
  const auto g = build_graph(knn_search(m, 1), {WeightScheme::inverse_distance, 0.0});
  ASSERT_EQ(g.n_edges(), 1u);
  EXPECT_EQ(g.edges()[0].u, 0u);
  EXPECT_EQ(g.edges()[0].v, 1u);
  EXPECT_DOUBLE_EQ(g.edges()[0].weight, 1.0 / 5.0);
}

TEST(Graph, WeightSchemes) {
  const EmbeddingMatrix m(2, 1, {0.0f, 0.0f});
  EXPECT_DOUBLE_EQ(build_graph(knn_search(m, 1), {WeightScheme::inverse_distance, 0}).edges()[0].weight, 1.0);
  EXPECT_DOUBLE_EQ(build_graph(knn_search(m, 1), {WeightScheme::gaussian, 0}).edges()[0].weight, 1.0);
  const EmbeddingMatrix far(2, 1, {0.0f, 3.0f});
  const auto nn = knn_search(far, 1);
  EXPECT_DOUBLE_EQ(build_graph(nn, {WeightScheme::unit, 0}).edges()[0].weight, 1.0);
  EXPECT_NEAR(build_graph(nn, {WeightScheme::gaussian, 2.0}).edges()[0].weight, std::exp(-9.0 / 8.0), 1e-15);
  // Median distance 3 becomes the bandwidth.
  EXPECT_NEAR(build_graph(nn, {WeightScheme::gaussian, 0.0}).edges()[0].weight, std::exp(-0.5), 1e-15);
  // Far apart with a tiny bandwidth underflows; the weight stays positive.
  EXPECT_GT(build_graph(nn, {WeightScheme::gaussian, 1e-3}).edges()[0].weight, 0.0);
}

TEST(Graph, UnionSymmetrization) {
  // knn(2) = {1} but knn(1) = {0}: edge {1,2} must still exist.
  const EmbeddingMatrix m(3, 1, {0.0f, 1.0f, 10.0f});
  const auto g = build_graph(knn_search(m, 1), {WeightScheme::unit, 0});
  ASSERT_EQ(g.n_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1, 1.0}));
  EXPECT_EQ(g.edges()[1], (Edge{1, 2, 1.0}));
  EXPECT_EQ(g.degree(1), 2u);
  const auto s = degree_stats(g);
  EXPECT_EQ(s.min_degree, 1u);
  EXPECT_EQ(s.max_degree, 2u);
  EXPECT_NEAR(s.mean_degree, 4.0 / 3.0, 1e-12);
}

TEST(Graph, GraphIsSymmetricAndMatchesOracleNeighborhoods) {
  const auto raw = oracle::random_gaussian(120, 6, 10);
  const auto g = build_graph(knn_search(to_matrix(raw), 5), {WeightScheme::unit, 0});
  const auto expected = oracle::knn(raw, 5);
  std::set<std::pair<std::uint32_t, std::uint32_t>> want;
  for (std::uint32_t i = 0; i < raw.size(); ++i) {
    for (const auto& [d, j] : expected[i]) {
      want.emplace(std::min(i, j), std::max(i, j));
    }
  }
  ASSERT_EQ(g.n_edges(), want.size());
  for (const auto& e : g.edges()) {
    EXPECT_TRUE(want.count({e.u, e.v}));
  }
  double total = 0.0;
  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    EXPECT_GE(g.degree(v), 5u);
    for (auto u : g.neighbors(v)) {
      const auto back = g.neighbors(u);
      EXPECT_NE(std::find(back.begin(), back.end(), v), back.end());
    }
    total += g.weighted_degree(v);
  }
  EXPECT_DOUBLE_EQ(total, 2.0 * g.total_weight());
}

TEST(Graph, TwoSeparatedCliquesHaveNoCrossEdges) {
  std::vector<float> v;
  for (int i = 0; i < 6; ++i) {
    v.push_back(0.1f * static_cast<float>(i));
  }
  for (int i = 0; i < 6; ++i) {
    v.push_back(100.0f + 0.1f * static_cast<float>(i));
  }
  const auto g = build_graph(knn_search(EmbeddingMatrix(12, 1, v), 3), {WeightScheme::unit, 0});
  for (const auto& e : g.edges()) {
    EXPECT_EQ(e.u < 6, e.v < 6);
  }
}

TEST(Graph, RejectsMalformedEdges) {
  EXPECT_THROW(KnnGraph(3, {{1, 1, 1.0}}), DataError);
  EXPECT_THROW(KnnGraph(3, {{0, 5, 1.0}}), DataError);
  EXPECT_THROW(KnnGraph(3, {{0, 1, 1.0}, {1, 0, 1.0}}), DataError);
  EXPECT_THROW(KnnGraph(3, {{0, 1, 0.0}}), DataError);
  EXPECT_THROW(KnnGraph(3, {{0, 1, std::nan("")}}), DataError);
}

TEST(Graph, DegreeStatsOnPathAndSingleton) {
  const KnnGraph path(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  const auto s = degree_stats(path);
  EXPECT_EQ(s.min_degree, 1u);
  EXPECT_EQ(s.max_degree, 2u);
  EXPECT_DOUBLE_EQ(s.mean_degree, 1.5);
  EXPECT_EQ(s.n_edges, 3u);
  const auto single = degree_stats(KnnGraph(1, {}));
  EXPECT_EQ(single.max_degree, 0u);
  EXPECT_EQ(single.n_edges, 0u);
}

TEST(Graph, EdgeListRoundTrip) {
  testing_support::TempDir dir;
  const auto g = build_graph(knn_search(to_matrix(oracle::random_gaussian(50, 4, 12)), 4), {});
  save_edge_list(g, dir / "g.txt");
  const auto back = load_edge_list(dir / "g.txt", 50);
  ASSERT_EQ(back.n_edges(), g.n_edges());
  for (std::size_t i = 0; i < g.n_edges(); ++i) {
    EXPECT_EQ(back.edges()[i].u, g.edges()[i].u);
    EXPECT_EQ(back.edges()[i].v, g.edges()[i].v);
    EXPECT_NEAR(back.edges()[i].weight, g.edges()[i].weight, 1e-15 * g.edges()[i].weight);
  }
}

TEST(Graph, MedianDistance) {
  const EmbeddingMatrix m(3, 1, {0.0f, 1.0f, 10.0f});
  EXPECT_DOUBLE_EQ(median_distance(knn_search(m, 1)), 1.0);
}
