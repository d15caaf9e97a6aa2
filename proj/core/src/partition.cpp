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

#include "embclust/partition.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "embclust/error.hpp"

namespace embclust {

Partition::Partition(std::vector<std::uint32_t> assignment, std::uint32_t n_clusters)
    : assignment_(std::move(assignment)), n_clusters_(n_clusters), sizes_(n_clusters, 0) {
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] >= n_clusters_) {
      throw DataError("cluster id " + std::to_string(assignment_[i]) + " at item " +
                      std::to_string(i) + " is not below n_clusters = " +
                      std::to_string(n_clusters_));
    }
    ++sizes_[assignment_[i]];
  }
}

Partition Partition::from_labels(std::span<const std::uint32_t> raw) {
  std::unordered_map<std::uint32_t, std::uint32_t> relabel;
  std::vector<std::uint32_t> dense;
  dense.reserve(raw.size());
  for (auto r : raw) {
    auto [it, _] = relabel.emplace(r, static_cast<std::uint32_t>(relabel.size()));
    dense.push_back(it->second);
  }
  const auto n = static_cast<std::uint32_t>(relabel.size());
  return Partition(std::move(dense), n);
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> out(n_clusters_);
  for (std::uint32_t c = 0; c < n_clusters_; ++c) {
    out[c].reserve(sizes_[c]);
  }
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    out[assignment_[i]].push_back(i);
  }
  return out;
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.size() != size()) {
    return false;
  }
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> parent(n_clusters_, kUnset);
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    auto& p = parent[assignment_[i]];
    if (p == kUnset) {
      p = coarser[i];
    } else if (p != coarser[i]) {
      return false;
    }
  }
  return true;
}

void save_partition(const Partition& partition, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  for (std::size_t i = 0; i < partition.size(); ++i) {
    out << i << ' ' << partition[i] << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

Partition load_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open partition file " + path.string());
  }
  std::vector<std::uint32_t> assignment;
  std::uint32_t max_cluster = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream fields(line);
    std::uint64_t id = 0;
    std::uint32_t cluster = 0;
    if (!(fields >> id >> cluster)) {
      throw DataError("malformed partition line " + path.string() + ":" + std::to_string(line_no));
    }
    if (id != assignment.size()) {
      throw DataError("partition ids must be consecutive from 0 (" + path.string() + ":" +
                      std::to_string(line_no) + ")");
    }
    assignment.push_back(cluster);
    max_cluster = std::max(max_cluster, cluster);
  }
  const std::uint32_t n = assignment.empty() ? 0 : max_cluster + 1;
  return Partition(std::move(assignment), n);
}

}  // namespace embclust
