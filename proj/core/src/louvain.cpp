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

#include "embclust/louvain.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "embclust/error.hpp"
#include "embclust/parallel.hpp"
#include "embclust/random.hpp"

namespace embclust {
namespace {

// Moves must beat staying put by more than rounding noise on Q.
constexpr double kMoveEpsilon = 1e-12;

// Symmetric weighted graph with self-loops. A self-loop entry holds the
// community-internal weight of a contracted node counted over ordered pairs,
// so degree[i] = self_loop[i] + sum of off-diagonal weights.
struct WorkGraph {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> targets;
  std::vector<double> weights;
  std::vector<double> self_loop;
  std::vector<double> degree;
  double two_m = 0.0;

  static WorkGraph from(const KnnGraph& g) {
    WorkGraph w;
    w.n = g.n_nodes();
    w.offsets.resize(w.n + 1, 0);
    w.self_loop.assign(w.n, 0.0);
    w.degree.resize(w.n);
    for (std::size_t i = 0; i < w.n; ++i) {
      w.offsets[i + 1] = w.offsets[i] + g.degree(i);
      const auto nb = g.neighbors(i);
      const auto wt = g.weights(i);
      w.targets.insert(w.targets.end(), nb.begin(), nb.end());
      w.weights.insert(w.weights.end(), wt.begin(), wt.end());
      w.degree[i] = g.weighted_degree(i);
      w.two_m += w.degree[i];
    }
    return w;
  }
};

double work_modularity(const WorkGraph& g, std::span<const std::uint32_t> community,
                       std::size_t n_communities, double resolution) {
  if (g.two_m <= 0.0) {
    return 0.0;
  }
  std::vector<double> in(n_communities, 0.0);
  std::vector<double> tot(n_communities, 0.0);
  for (std::size_t u = 0; u < g.n; ++u) {
    const auto cu = community[u];
    tot[cu] += g.degree[u];
    in[cu] += g.self_loop[u];
    for (std::size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      if (community[g.targets[e]] == cu) {
        in[cu] += g.weights[e];
      }
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < n_communities; ++c) {
    const double frac = tot[c] / g.two_m;
    q += in[c] / g.two_m - resolution * frac * frac;
  }
  return q;
}

// Renumbers communities by first appearance in node order; returns the count.
std::size_t compact(std::vector<std::uint32_t>& community) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> remap(community.size(), kUnset);
  std::uint32_t next = 0;
  for (auto& c : community) {
    if (remap[c] == kUnset) {
      remap[c] = next++;
    }
    c = remap[c];
  }
  return next;
}

WorkGraph contract(const WorkGraph& g, std::span<const std::uint32_t> community,
                   std::size_t n_communities) {
  std::vector<std::size_t> member_offsets(n_communities + 1, 0);
  for (std::size_t u = 0; u < g.n; ++u) {
    ++member_offsets[community[u] + 1];
  }
  std::partial_sum(member_offsets.begin(), member_offsets.end(), member_offsets.begin());
  std::vector<std::uint32_t> members(g.n);
  {
    std::vector<std::size_t> cursor(member_offsets.begin(), member_offsets.end() - 1);
    for (std::size_t u = 0; u < g.n; ++u) {
      members[cursor[community[u]]++] = static_cast<std::uint32_t>(u);
    }
  }

  WorkGraph out;
  out.n = n_communities;
  out.self_loop.assign(n_communities, 0.0);
  out.degree.assign(n_communities, 0.0);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n_communities);

#pragma omp parallel num_threads(parallel::num_threads())
  {
    std::vector<double> acc(n_communities, 0.0);
    std::vector<std::uint32_t> touched;
#pragma omp for schedule(dynamic, 64)
    for (std::size_t c = 0; c < n_communities; ++c) {
      double self = 0.0;
      double deg = 0.0;
      for (std::size_t m = member_offsets[c]; m < member_offsets[c + 1]; ++m) {
        const auto u = members[m];
        self += g.self_loop[u];
        deg += g.degree[u];
        for (std::size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
          const auto d = community[g.targets[e]];
          if (d == c) {
            self += g.weights[e];
          } else {
            if (acc[d] == 0.0) {
              touched.push_back(d);
            }
            acc[d] += g.weights[e];
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      auto& row = rows[c];
      row.reserve(touched.size());
      for (auto d : touched) {
        row.emplace_back(d, acc[d]);
        acc[d] = 0.0;
      }
      touched.clear();
      out.self_loop[c] = self;
      out.degree[c] = deg;
    }
  }

  out.offsets.resize(n_communities + 1, 0);
  for (std::size_t c = 0; c < n_communities; ++c) {
    out.offsets[c + 1] = out.offsets[c] + rows[c].size();
  }
  out.targets.reserve(out.offsets.back());
  out.weights.reserve(out.offsets.back());
  for (auto& row : rows) {
    for (const auto& [d, w] : row) {
      out.targets.push_back(d);
      out.weights.push_back(w);
    }
  }
  out.two_m = g.two_m;
  return out;
}

// Sweeps until no node moves. Returns true if any node moved.
bool local_moves(const WorkGraph& g, std::vector<std::uint32_t>& community, std::size_t pass,
                 Rng& rng, const LouvainParams& params,
                 std::span<const std::uint32_t> node_of_original) {
  const double gamma = params.resolution;
  const double two_m = g.two_m;
  std::vector<double> tot(g.degree);
  std::vector<std::uint32_t> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(std::span<std::uint32_t>(order), rng);

  std::vector<double> link(g.n, 0.0);
  std::vector<char> seen(g.n, 0);
  std::vector<std::uint32_t> touched;

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (const auto i : order) {
      const double ki = g.degree[i];
      if (ki <= 0.0) {
        continue;
      }
      const auto own = community[i];
      for (std::size_t e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
        const auto c = community[g.targets[e]];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        link[c] += g.weights[e];
      }

      tot[own] -= ki;
      const double scale = gamma * ki / two_m;
      const double own_score = link[own] - scale * tot[own];
      std::uint32_t best = own;
      double best_score = -std::numeric_limits<double>::infinity();
      for (const auto c : touched) {
        if (c == own) {
          continue;
        }
        const double score = link[c] - scale * tot[c];
        if (score > best_score || (score == best_score && c < best)) {
          best_score = score;
          best = c;
        }
      }
      // Q changes by 2 (score_new - score_own) / 2m.
      const double gain = best == own ? 0.0 : 2.0 * (best_score - own_score) / two_m;
      if (best != own && gain > kMoveEpsilon) {
        community[i] = best;
        tot[best] += ki;
        moved = true;
        any_move = true;
        if (params.on_move) {
          params.on_move(LouvainMove{pass, i, own, best, gain, node_of_original, community});
        }
      } else {
        tot[own] += ki;
      }

      for (const auto c : touched) {
        link[c] = 0.0;
        seen[c] = 0;
      }
      touched.clear();
    }
  }
  return any_move;
}

}  // namespace

LouvainResult louvain_cluster(const KnnGraph& graph, const LouvainParams& params) {
  if (!(params.resolution > 0.0)) {
    throw ConfigError("louvain: resolution must be > 0");
  }
  if (graph.n_nodes() == 0) {
    throw DataError("louvain: empty graph");
  }
  const std::size_t n = graph.n_nodes();
  LouvainResult result;

  std::vector<std::uint32_t> singletons(n);
  std::iota(singletons.begin(), singletons.end(), 0);
  if (graph.n_edges() == 0) {
    Partition p(singletons, static_cast<std::uint32_t>(n));
    result.levels.push_back(p);
    result.modularity_trace.push_back(0.0);
    result.final_partition = std::move(p);
    return result;
  }

  Rng rng(params.seed);
  WorkGraph g = WorkGraph::from(graph);
  std::vector<std::uint32_t> node_of_original = singletons;
  double previous_q = work_modularity(g, singletons, n, params.resolution);

  for (std::size_t pass = 0;; ++pass) {
    std::vector<std::uint32_t> community(g.n);
    std::iota(community.begin(), community.end(), 0);
    const bool moved = local_moves(g, community, pass, rng, params, node_of_original);
    if (!moved && pass > 0) {
      break;
    }
    const std::size_t n_comm = compact(community);
    const double q = work_modularity(g, community, n_comm, params.resolution);

    for (auto& v : node_of_original) {
      v = community[v];
    }
    result.levels.emplace_back(node_of_original, static_cast<std::uint32_t>(n_comm));
    result.modularity_trace.push_back(q);

    if (!moved || q - previous_q < params.min_modularity_gain || n_comm == g.n) {
      break;
    }
    previous_q = q;
    g = contract(g, community, n_comm);
  }
  result.final_partition = result.levels.back();
  return result;
}

double modularity(const KnnGraph& graph, const Partition& partition, double resolution) {
  if (partition.size() != graph.n_nodes()) {
    throw DataError("modularity: partition covers " + std::to_string(partition.size()) +
                    " nodes, graph has " + std::to_string(graph.n_nodes()));
  }
  const double two_m = 2.0 * graph.total_weight();
  if (two_m <= 0.0) {
    return 0.0;
  }
  std::vector<double> in(partition.n_clusters(), 0.0);
  std::vector<double> tot(partition.n_clusters(), 0.0);
  for (const auto& e : graph.edges()) {
    const auto cu = partition[e.u];
    const auto cv = partition[e.v];
    tot[cu] += e.weight;
    tot[cv] += e.weight;
    if (cu == cv) {
      in[cu] += 2.0 * e.weight;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < in.size(); ++c) {
    const double frac = tot[c] / two_m;
    q += in[c] / two_m - resolution * frac * frac;
  }
  return q;
}

Partition flatten_level(const LouvainResult& result, std::size_t level) {
  if (level >= result.n_passes()) {
    throw ConfigError("flatten_level: level " + std::to_string(level) + " out of range (" +
                      std::to_string(result.n_passes()) + " passes)");
  }
  return result.levels[level];
}

void save_hierarchy(const LouvainResult& result, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw IoError("cannot create " + directory.string() + ": " + ec.message());
  }
  nlohmann::json manifest;
  manifest["n_passes"] = result.n_passes();
  manifest["modularity_trace"] = result.modularity_trace;
  manifest["levels"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.n_passes(); ++i) {
    const auto file = "level_" + std::to_string(i) + ".txt";
    save_partition(result.levels[i], directory / file);
    manifest["levels"].push_back(
        {{"level", i}, {"file", file}, {"n_clusters", result.levels[i].n_clusters()}});
  }
  std::ofstream out(directory / "hierarchy.json", std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + (directory / "hierarchy.json").string());
  }
  out << manifest.dump(2) << '\n';
}

}  // namespace embclust
