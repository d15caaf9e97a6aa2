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

namespace embclust {

/// Cluster assignment of N items. Cluster ids are dense in [0, n_clusters);
/// a cluster may be empty only where a producer says so (kmeans `assign`).
class Partition {
 public:
  Partition() = default;
  /// Throws DataError if any entry is >= n_clusters.
  Partition(std::vector<std::uint32_t> assignment, std::uint32_t n_clusters);

  /// Relabels arbitrary ids densely in order of first appearance.
  static Partition from_labels(std::span<const std::uint32_t> raw);

  std::size_t size() const noexcept { return assignment_.size(); }
  std::uint32_t n_clusters() const noexcept { return n_clusters_; }
  std::span<const std::uint32_t> assignment() const noexcept { return assignment_; }
  std::uint32_t operator[](std::size_t i) const noexcept { return assignment_[i]; }
  std::span<const std::size_t> sizes() const noexcept { return sizes_; }

  /// Member indices of every cluster, ascending within each cluster.
  std::vector<std::vector<std::size_t>> members() const;

  /// True when every cluster of *this is contained in one cluster of `coarser`.
  bool refines(const Partition& coarser) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.n_clusters_ == b.n_clusters_ && a.assignment_ == b.assignment_;
  }

 private:
  std::vector<std::uint32_t> assignment_;
  std::uint32_t n_clusters_ = 0;
  std::vector<std::size_t> sizes_;
};

/// Writes "id cluster" lines, one per item, id = row index.
void save_partition(const Partition& partition, const std::filesystem::path& path);
Partition load_partition(const std::filesystem::path& path);

}  // namespace embclust
