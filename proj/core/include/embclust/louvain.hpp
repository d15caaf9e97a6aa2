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
#include <functional>
#include <span>
#include <vector>

#include "embclust/knn.hpp"
#include "embclust/partition.hpp"

namespace embclust {

/// Reported after every accepted local move.
struct LouvainMove {
  std::size_t pass = 0;
  std::uint32_t node = 0;  // node of the current (possibly contracted) graph
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  /// Predicted modularity change of the move.
  double gain = 0.0;
  /// Original node -> node of the current graph.
  std::span<const std::uint32_t> node_of_original;
  /// Current-graph node -> community, after the move.
  std::span<const std::uint32_t> community;
};

struct LouvainParams {
  double resolution = 1.0;
  std::uint64_t seed = 0;
  double min_modularity_gain = 1e-6;
  /// Optional observer, used by tests to audit the incremental bookkeeping.
  std::function<void(const LouvainMove&)> on_move;
};

struct LouvainResult {
  Partition final_partition;
  /// One partition per completed pass over original node ids, coarsest last.
  std::vector<Partition> levels;
  std::vector<double> modularity_trace;
  std::size_t n_passes() const noexcept { return levels.size(); }
};

/// Multi-level Louvain modularity maximization.
///
/// Each pass shuffles the node order once with the seeded generator, then
/// sweeps until no node moves. A node moves to the neighboring community with
/// the largest strictly positive gain, ties to the lowest community id.
/// Communities are then contracted and a new pass starts; the run stops when
/// a pass moves nothing or improves modularity by less than
/// `min_modularity_gain`. A graph with nodes but no edges yields singletons.
///
/// Throws ConfigError if resolution <= 0, DataError on an empty graph.
LouvainResult louvain_cluster(const KnnGraph& graph, const LouvainParams& params = {});

/// Q = sum_c [ in_c / 2m - resolution * (tot_c / 2m)^2 ].
/// Throws DataError if the partition does not cover the graph's nodes.
double modularity(const KnnGraph& graph, const Partition& partition, double resolution = 1.0);

/// Partition of the given pass. Throws ConfigError if level >= n_passes.
Partition flatten_level(const LouvainResult& result, std::size_t level);

/// One partition file per level (`level_<i>.txt`) plus `hierarchy.json`.
void save_hierarchy(const LouvainResult& result, const std::filesystem::path& directory);

}  // namespace embclust
