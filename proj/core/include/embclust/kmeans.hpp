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
#include <optional>
#include <vector>

#include "embclust/embedstore.hpp"
#include "embclust/partition.hpp"

namespace embclust {

enum class KmeansInit { kmeans_plus_plus, random };

struct KmeansParams {
  std::size_t k = 0;
  KmeansInit init = KmeansInit::kmeans_plus_plus;
  /// Training subset size. Unset means 256 * k; 0 means use every row.
  std::optional<std::size_t> sample_cap;
  std::size_t max_iter = 100;
  double tol = 1e-4;
  /// Independent seedings; the run with the lowest training inertia wins.
  std::size_t n_init = 10;
  std::uint64_t seed = 0;

  /// Effective training-set size for a matrix with n rows.
  std::size_t training_size(std::size_t n_items) const;
};

struct KmeansModel {
  EmbeddingMatrix centroids;
  /// Sum of squared distances of every row to its assigned centroid.
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  std::size_t training_rows = 0;
  /// Training-set inertia after each assignment step.
  std::vector<double> inertia_trace;
};

struct KmeansResult {
  KmeansModel model;
  Partition partition;
};

/// Lloyd's k-means.
///
/// Centroids are trained on a uniform random subset of
/// min(n_items, training_size) rows, then every row is assigned. A cluster
/// that empties is reseeded with the point farthest from its own centroid.
/// Stops when the relative inertia improvement drops below `tol` or after
/// `max_iter` assignment steps. k-means++ seeding is greedy: each new center
/// is the best of 2 + floor(ln k) D^2-weighted draws. The whole seed-and-Lloyd
/// run is repeated `n_init` times on the same training rows.
///
/// Throws ConfigError if k is out of range or exceeds the number of
/// distinct training rows.
KmeansResult kmeans_fit(const EmbeddingMatrix& matrix, const KmeansParams& params);

/// Nearest centroid per row, ties to the lower centroid index. The returned
/// partition has model.centroids.n_items() clusters, some possibly empty.
Partition assign(const KmeansModel& model, const EmbeddingMatrix& matrix);

/// Centroids in the embedding format plus a JSON sidecar at
/// `<path>.json` holding k, inertia, iterations and training rows.
void save_kmeans_model(const KmeansModel& model, const std::filesystem::path& path);

}  // namespace embclust
