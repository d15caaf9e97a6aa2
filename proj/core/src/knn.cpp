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

#include "embclust/knn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "embclust/distance.hpp"
#include "embclust/error.hpp"
#include "embclust/parallel.hpp"

namespace embclust {
namespace {

using Candidate = std::pair<float, std::uint32_t>;  // (squared distance, id)

class BoundedHeap {
 public:
  void reset(std::size_t k) {
    k_ = k;
    items_.clear();
    items_.reserve(k);
  }

  void offer(float d2, std::uint32_t id) {
    const Candidate c{d2, id};
    if (items_.size() < k_) {
      items_.push_back(c);
      std::push_heap(items_.begin(), items_.end());
    } else if (c < items_.front()) {
      std::pop_heap(items_.begin(), items_.end());
      items_.back() = c;
      std::push_heap(items_.begin(), items_.end());
    }
  }

  const std::vector<Candidate>& items() const noexcept { return items_; }

 private:
  std::size_t k_ = 0;
  std::vector<Candidate> items_;
};

}  // namespace

NeighborList::NeighborList(std::size_t n_queries, std::size_t k, std::vector<Neighbor> data)
    : n_queries_(n_queries), k_(k), data_(std::move(data)) {
  if (data_.size() != n_queries_ * k_) {
    throw DataError("neighbor list holds " + std::to_string(data_.size()) + " entries, expected " +
                    std::to_string(n_queries_ * k_));
  }
}

NeighborList knn_search(const EmbeddingMatrix& matrix, std::size_t k, std::size_t block_size) {
  const std::size_t n = matrix.n_items();
  const std::size_t dim = matrix.dim();
  if (k < 1 || k >= n) {
    throw ConfigError("knn_search: k = " + std::to_string(k) + " must satisfy 1 <= k < n_items = " +
                      std::to_string(n));
  }
  if (block_size < 1) {
    throw ConfigError("knn_search: block_size must be >= 1");
  }
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("knn_search: too many rows for 32-bit ids");
  }

  const kernel::PackedRows packed(matrix.values(), n, dim);
  const auto norms = packed.norms();
  const auto values = matrix.values();
  const std::size_t n_tiles = (n + block_size - 1) / block_size;
  std::vector<Neighbor> out(n * k);

#pragma omp parallel num_threads(parallel::num_threads())
  {
    kernel::QueryGroup group(dim);
    float dots[kernel::kQueryGroup * kernel::kPanelWidth];
    std::vector<BoundedHeap> heaps(std::min(block_size, n));

#pragma omp for schedule(dynamic, 1)
    for (std::size_t tile = 0; tile < n_tiles; ++tile) {
      const std::size_t q0 = tile * block_size;
      const std::size_t q1 = std::min(n, q0 + block_size);
      for (std::size_t q = q0; q < q1; ++q) {
        heaps[q - q0].reset(k);
      }

      for (std::size_t c0 = 0; c0 < n; c0 += block_size) {
        const std::size_t c1 = std::min(n, c0 + block_size);
        const std::size_t p0 = c0 / kernel::kPanelWidth;
        const std::size_t p1 = (c1 + kernel::kPanelWidth - 1) / kernel::kPanelWidth;
        for (std::size_t g = q0; g < q1; g += kernel::kQueryGroup) {
          group.load(values, g, std::min(kernel::kQueryGroup, q1 - g));
          for (std::size_t p = p0; p < p1; ++p) {
            kernel::dot_panel(group, packed, p, dots);
            const std::size_t first = p * kernel::kPanelWidth;
            const std::size_t j0 = std::max(c0, first);
            const std::size_t j1 = std::min(c1, first + kernel::kPanelWidth);
            for (std::size_t r = 0; r < group.count(); ++r) {
              const std::size_t qi = g + r;
              auto& heap = heaps[qi - q0];
              const float* row_dots = dots + r * kernel::kPanelWidth - first;
              for (std::size_t j = j0; j < j1; ++j) {
                if (j == qi) {
                  continue;
                }
                heap.offer(kernel::squared_distance(norms[qi], norms[j], row_dots[j]),
                           static_cast<std::uint32_t>(j));
              }
            }
          }
        }
      }

      for (std::size_t q = q0; q < q1; ++q) {
        const auto& items = heaps[q - q0].items();
        Neighbor* dst = out.data() + q * k;
        for (std::size_t i = 0; i < k; ++i) {
          const auto id = items[i].second;
          dst[i] = {id, static_cast<float>(std::sqrt(
                            kernel::exact_squared_distance(matrix.row(q), matrix.row(id))))};
        }
        std::sort(dst, dst + k, [](const Neighbor& a, const Neighbor& b) {
          return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
        });
      }
    }
  }
  return NeighborList(n, k, std::move(out));
}

double median_distance(const NeighborList& neighbors) {
  std::vector<float> d;
  d.reserve(neighbors.data().size());
  for (const auto& nb : neighbors.data()) {
    d.push_back(nb.distance);
  }
  if (d.empty()) {
    return 0.0;
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double m = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

KnnGraph::KnnGraph(std::size_t n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.u == e.v) {
      throw DataError("self-loop on node " + std::to_string(e.u));
    }
    if (e.u >= n_nodes_ || e.v >= n_nodes_) {
      throw DataError("edge endpoint out of range for " + std::to_string(n_nodes_) + " nodes");
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw DataError("edge weight must be positive and finite");
    }
    if (e.u > e.v) {
      std::swap(e.u, e.v);
    }
  }
  const auto key_less = [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  };
  if (!std::is_sorted(edges_.begin(), edges_.end(), key_less)) {
    std::sort(edges_.begin(), edges_.end(), key_less);
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i - 1].u == edges_[i].u && edges_[i - 1].v == edges_[i].v) {
      throw DataError("duplicate edge {" + std::to_string(edges_[i].u) + ", " +
                      std::to_string(edges_[i].v) + "}");
    }
  }

  offsets_.assign(n_nodes_ + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
    total_weight_ += e.weight;
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  targets_.resize(offsets_.back());
  weights_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    targets_[cursor[e.u]] = e.v;
    weights_[cursor[e.u]++] = e.weight;
    targets_[cursor[e.v]] = e.u;
    weights_[cursor[e.v]++] = e.weight;
  }
}

double KnnGraph::weighted_degree(std::size_t node) const noexcept {
  double s = 0.0;
  for (double w : weights(node)) {
    s += w;
  }
  return s;
}

KnnGraph build_graph(const NeighborList& neighbors, const Weighting& weighting) {
  struct Directed {
    std::uint32_t u;
    std::uint32_t v;
    float d;
  };
  std::vector<Directed> pairs;
  pairs.reserve(neighbors.data().size());
  for (std::size_t q = 0; q < neighbors.n_queries(); ++q) {
    const auto self = static_cast<std::uint32_t>(q);
    for (const auto& nb : neighbors.of(q)) {
      if (nb.id == self) {
        continue;
      }
      pairs.push_back({std::min(self, nb.id), std::max(self, nb.id), nb.distance});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Directed& a, const Directed& b) {
    if (a.u != b.u) return a.u < b.u;
    if (a.v != b.v) return a.v < b.v;
    return a.d < b.d;
  });

  double sigma = weighting.sigma;
  if (weighting.scheme == WeightScheme::gaussian && !(sigma > 0.0)) {
    sigma = median_distance(neighbors);
    if (!(sigma > 0.0)) {
      sigma = 1.0;  // all neighbors coincide
    }
  }
  const double two_sigma_sq = 2.0 * sigma * sigma;

  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0 && pairs[i].u == pairs[i - 1].u && pairs[i].v == pairs[i - 1].v) {
      continue;  // sorted by d, first is smallest
    }
    const double d = pairs[i].d;
    double w = 1.0;
    switch (weighting.scheme) {
      case WeightScheme::unit:
        w = 1.0;
        break;
      case WeightScheme::inverse_distance:
        w = 1.0 / (1.0 + d * d);
        break;
      case WeightScheme::gaussian:
        w = std::max(std::exp(-(d * d) / two_sigma_sq), std::numeric_limits<double>::min());
        break;
    }
    if (!std::isfinite(w)) {
      throw DataError("non-finite edge weight for {" + std::to_string(pairs[i].u) + ", " +
                      std::to_string(pairs[i].v) + "}");
    }
    edges.push_back({pairs[i].u, pairs[i].v, w});
  }
  return KnnGraph(neighbors.n_queries(), std::move(edges));
}

DegreeStats degree_stats(const KnnGraph& graph) {
  DegreeStats s;
  s.n_edges = graph.n_edges();
  if (graph.n_nodes() == 0) {
    return s;
  }
  s.min_degree = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  for (std::size_t i = 0; i < graph.n_nodes(); ++i) {
    const auto d = graph.degree(i);
    s.min_degree = std::min(s.min_degree, d);
    s.max_degree = std::max(s.max_degree, d);
    total += d;
  }
  s.mean_degree = static_cast<double>(total) / static_cast<double>(graph.n_nodes());
  return s;
}

void save_edge_list(const KnnGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.precision(17);
  for (const auto& e : graph.edges()) {
    out << e.u << ' ' << e.v << ' ' << e.weight << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

KnnGraph load_edge_list(const std::filesystem::path& path, std::size_t n_nodes) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open edge list " + path.string());
  }
  std::vector<Edge> edges;
  std::size_t max_node = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream fields(line);
    Edge e;
    if (!(fields >> e.u >> e.v >> e.weight)) {
      throw DataError("malformed edge at " + path.string() + ":" + std::to_string(line_no));
    }
    max_node = std::max<std::size_t>(max_node, std::max(e.u, e.v));
    edges.push_back(e);
  }
  if (n_nodes == 0) {
    n_nodes = edges.empty() ? 0 : max_node + 1;
  }
  return KnnGraph(n_nodes, std::move(edges));
}

}  // namespace embclust
