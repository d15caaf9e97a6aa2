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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "embclust/embedstore.hpp"

namespace embclust {

struct Neighbor {
  std::uint32_t id = 0;
  float distance = 0.0f;  // L2, not squared

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exactly k neighbors per query row, self excluded, sorted by
/// (distance, id) ascending.
class NeighborList {
 public:
  NeighborList(std::size_t n_queries, std::size_t k, std::vector<Neighbor> data);

  std::size_t n_queries() const noexcept { return n_queries_; }
  std::size_t k() const noexcept { return k_; }
  std::span<const Neighbor> of(std::size_t query) const noexcept {
    return {data_.data() + query * k_, k_};
  }
  std::span<const Neighbor> data() const noexcept { return data_; }

 private:
  std::size_t n_queries_;
  std::size_t k_;
  std::vector<Neighbor> data_;
};

inline constexpr std::size_t kDefaultKnnK = 15;
inline constexpr std::size_t kDefaultBlockSize = 256;

/// Exact k nearest neighbors of every row under L2.
///
/// Candidates are scored tile by tile with the squared-norm expansion and
/// kept in a bounded max-heap per query; the k survivors are then re-scored
/// with a direct double-precision distance and sorted. `block_size` sets both
/// the query tile height and the candidate tile width; it changes memory
/// traffic only, never the result. Parallel over query tiles.
///
/// Throws ConfigError unless 1 <= k < n_items and block_size >= 1.
NeighborList knn_search(const EmbeddingMatrix& matrix, std::size_t k,
                        std::size_t block_size = kDefaultBlockSize);

/// Median over all listed neighbor distances.
double median_distance(const NeighborList& neighbors);

enum class WeightScheme { unit, inverse_distance, gaussian };

struct Weighting {
  WeightScheme scheme = WeightScheme::gaussian;
  /// Gaussian bandwidth. Non-positive means "median neighbor distance".
  double sigma = 0.0;
};

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected weighted graph without self-loops, stored as CSR adjacency.
class KnnGraph {
 public:
  /// Builds from a canonical edge list. Throws DataError on self-loops,
  /// out-of-range endpoints, duplicates, or non-positive/non-finite weights.
  KnnGraph(std::size_t n_nodes, std::vector<Edge> edges);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }

  /// Canonical edge list: u < v, strictly sorted by (u, v).
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const std::uint32_t> neighbors(std::size_t node) const noexcept {
    return {targets_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  std::span<const double> weights(std::size_t node) const noexcept {
    return {weights_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  std::size_t degree(std::size_t node) const noexcept {
    return offsets_[node + 1] - offsets_[node];
  }
  /// Sum of incident edge weights.
  double weighted_degree(std::size_t node) const noexcept;
  double total_weight() const noexcept { return total_weight_; }

 private:
  std::size_t n_nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<double> weights_;
  double total_weight_ = 0.0;
};

/// Union-symmetrized k-NN graph: {u, v} is an edge iff v is in knn(u) or u is
/// in knn(v). Weights: unit 1; inverse-distance 1 / (1 + d^2); gaussian
/// exp(-d^2 / (2 sigma^2)). If the two directions disagree on d the smaller
/// is used. Gaussian weights that underflow to zero are floored at the
/// smallest positive double. Throws DataError on a non-finite weight.
KnnGraph build_graph(const NeighborList& neighbors, const Weighting& weighting);

struct DegreeStats {
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  double mean_degree = 0.0;
  std::size_t n_edges = 0;
};

DegreeStats degree_stats(const KnnGraph& graph);

/// Writes "u v weight" lines in canonical edge order.
void save_edge_list(const KnnGraph& graph, const std::filesystem::path& path);
KnnGraph load_edge_list(const std::filesystem::path& path, std::size_t n_nodes);

}  // namespace embclust
