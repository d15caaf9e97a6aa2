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

#include "embclust/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <string_view>
#include <unordered_set>

#include <json.hpp>

#include "embclust/distance.hpp"
#include "embclust/error.hpp"
#include "embclust/parallel.hpp"
#include "embclust/random.hpp"

namespace embclust {
namespace {

struct Assignment {
  std::vector<std::uint32_t> labels;
  std::vector<double> sq_dist;  // exact, to the assigned centroid
};

double chunked_sum(const std::vector<double>& values) {
  const std::size_t n_chunks = (values.size() + parallel::kReductionChunk - 1) / parallel::kReductionChunk;
  std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static) num_threads(parallel::num_threads())
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t lo = c * parallel::kReductionChunk;
    const std::size_t hi = std::min(values.size(), lo + parallel::kReductionChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      s += values[i];
    }
    partial[c] = s;
  }
  double total = 0.0;
  for (double p : partial) {
    total += p;
  }
  return total;
}

// Nearest centroid per row. The blocked float kernel shortlists candidates;
// anything within rounding distance of the best is re-scored exactly so
// ties resolve to the lower centroid index.
Assignment assign_rows(const EmbeddingMatrix& data, const EmbeddingMatrix& centroids) {
  const std::size_t n = data.n_items();
  const std::size_t dim = data.dim();
  const std::size_t k = centroids.n_items();
  const kernel::PackedRows packed(centroids.values(), k, dim);
  const auto cnorms = packed.norms();
  const float max_cnorm = *std::max_element(cnorms.begin(), cnorms.end());
  const auto qnorms = kernel::squared_norms(data.values(), n, dim);

  Assignment out;
  out.labels.resize(n);
  out.sq_dist.resize(n);
  const std::size_t n_groups = (n + kernel::kQueryGroup - 1) / kernel::kQueryGroup;

#pragma omp parallel num_threads(parallel::num_threads())
  {
    kernel::QueryGroup group(dim);
    float dots[kernel::kQueryGroup * kernel::kPanelWidth];
    std::vector<float> approx(kernel::kQueryGroup * k);

#pragma omp for schedule(static)
    for (std::size_t g = 0; g < n_groups; ++g) {
      const std::size_t first = g * kernel::kQueryGroup;
      group.load(data.values(), first, std::min(kernel::kQueryGroup, n - first));
      for (std::size_t p = 0; p < packed.n_panels(); ++p) {
        kernel::dot_panel(group, packed, p, dots);
        const std::size_t c0 = p * kernel::kPanelWidth;
        const std::size_t c1 = std::min(k, c0 + kernel::kPanelWidth);
        for (std::size_t r = 0; r < group.count(); ++r) {
          for (std::size_t c = c0; c < c1; ++c) {
            approx[r * k + c] = kernel::squared_distance(qnorms[first + r], cnorms[c],
                                                         dots[r * kernel::kPanelWidth + c - c0]);
          }
        }
      }
      for (std::size_t r = 0; r < group.count(); ++r) {
        const std::size_t i = first + r;
        const float* row = approx.data() + r * k;
        const float best = *std::min_element(row, row + k);
        const float margin = 1e-5f * (qnorms[i] + max_cnorm) + 1e-30f;
        double best_exact = std::numeric_limits<double>::infinity();
        std::uint32_t best_c = 0;
        for (std::size_t c = 0; c < k; ++c) {
          if (row[c] <= best + margin) {
            const double e = kernel::exact_squared_distance(data.row(i), centroids.row(c));
            if (e < best_exact) {
              best_exact = e;
              best_c = static_cast<std::uint32_t>(c);
            }
          }
        }
        out.labels[i] = best_c;
        out.sq_dist[i] = best_exact;
      }
    }
  }
  return out;
}

// Moves the farthest point (largest contribution to inertia) into each
// empty cluster and recenters that cluster on it. Donor clusters keep at
// least one member.
void repair_empty(const EmbeddingMatrix& data, Assignment& a, std::vector<float>& centroids,
                  std::size_t k) {
  const std::size_t dim = data.dim();
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : a.labels) {
    ++sizes[l];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) {
      continue;
    }
    std::size_t pick = a.labels.size();
    double far = -1.0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
      if (sizes[a.labels[i]] > 1 && a.sq_dist[i] > far) {
        far = a.sq_dist[i];
        pick = i;
      }
    }
    if (pick == a.labels.size()) {
      throw DataError("kmeans: cannot repair empty cluster, not enough points");
    }
    --sizes[a.labels[pick]];
    a.labels[pick] = static_cast<std::uint32_t>(c);
    a.sq_dist[pick] = 0.0;
    sizes[c] = 1;
    const auto src = data.row(pick);
    std::copy(src.begin(), src.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
  }
}

std::vector<float> update_means(const EmbeddingMatrix& data, const Assignment& a,
                                const std::vector<float>& previous, std::size_t k) {
  const std::size_t dim = data.dim();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    members[a.labels[i]].push_back(i);
  }
  std::vector<float> out(previous);
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel::num_threads())
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].empty()) {
      continue;
    }
    std::vector<double> sum(dim, 0.0);
    for (auto i : members[c]) {
      const auto row = data.row(i);
      for (std::size_t d = 0; d < dim; ++d) {
        sum[d] += row[d];
      }
    }
    const double inv = 1.0 / static_cast<double>(members[c].size());
    for (std::size_t d = 0; d < dim; ++d) {
      out[c * dim + d] = static_cast<float>(sum[d] * inv);
    }
  }
  return out;
}

std::size_t count_distinct_rows(const EmbeddingMatrix& data, std::size_t stop_at) {
  const std::size_t bytes = data.dim() * sizeof(float);
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < data.n_items() && seen.size() < stop_at; ++i) {
    seen.emplace(reinterpret_cast<const char*>(data.row(i).data()), bytes);
  }
  return seen.size();
}

/// D^2-weighted draw; points already chosen carry zero weight. Returns n
/// when no positive weight remains.
std::size_t draw_weighted(const std::vector<double>& weights, double total, Rng& rng) {
  const double target = uniform01(rng) * total;
  std::size_t pick = weights.size();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) {
      continue;
    }
    cumulative += weights[i];
    pick = i;
    if (cumulative > target) {
      break;
    }
  }
  return pick;
}

// Greedy k-means++: each step draws 2 + floor(ln k) candidates by D^2
// weight and keeps the one that lowers the potential most.
std::vector<float> init_plus_plus(const EmbeddingMatrix& data, std::size_t k, Rng& rng) {
  const std::size_t n = data.n_items();
  const std::size_t dim = data.dim();
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<float> centroids;
  centroids.reserve(k * dim);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<double> candidate(n);

  auto distances_to = [&](std::size_t idx, std::vector<double>& out) {
    const auto row = data.row(idx);
#pragma omp parallel for schedule(static) num_threads(parallel::num_threads())
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::min(nearest[i], kernel::exact_squared_distance(data.row(i), row));
    }
  };
  auto add_center = [&](std::size_t idx) {
    const auto row = data.row(idx);
    centroids.insert(centroids.end(), row.begin(), row.end());
  };

  const auto first = static_cast<std::size_t>(uniform_below(rng, n));
  add_center(first);
  distances_to(first, nearest);
  std::vector<double> best(n);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = chunked_sum(nearest);
    std::size_t chosen = n;
    double chosen_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t pick = draw_weighted(nearest, total, rng);
      if (pick == n) {
        throw ConfigError("kmeans: fewer distinct rows than k");
      }
      distances_to(pick, candidate);
      const double potential = chunked_sum(candidate);
      if (potential < chosen_potential) {
        chosen_potential = potential;
        chosen = pick;
        best.swap(candidate);
      }
    }
    add_center(chosen);
    nearest.swap(best);
  }
  return centroids;
}

std::vector<float> init_random(const EmbeddingMatrix& data, std::size_t k, Rng& rng) {
  const std::size_t n = data.n_items();
  const std::size_t bytes = data.dim() * sizeof(float);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(std::span<std::size_t>(order), rng);
  std::vector<float> centroids;
  std::unordered_set<std::string_view> chosen;
  for (std::size_t i = 0; i < n && chosen.size() < k; ++i) {
    const auto row = data.row(order[i]);
    if (chosen.emplace(reinterpret_cast<const char*>(row.data()), bytes).second) {
      centroids.insert(centroids.end(), row.begin(), row.end());
    }
  }
  return centroids;
}

struct LloydRun {
  std::vector<float> centroids;
  std::vector<double> trace;
  std::size_t iterations = 0;
};

LloydRun lloyd(const EmbeddingMatrix& train, std::vector<float> centroids, std::size_t k,
               const KmeansParams& params) {
  const std::size_t dim = train.dim();
  LloydRun run;
  double previous = std::numeric_limits<double>::infinity();
  std::vector<float> previous_centroids;
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    Assignment a = assign_rows(train, EmbeddingMatrix(k, dim, centroids));
    repair_empty(train, a, centroids, k);
    const double inertia = chunked_sum(a.sq_dist);
    if (inertia > previous) {
      // Float rounding of the means can cost a few ulps at convergence.
      centroids = std::move(previous_centroids);
      break;
    }
    run.trace.push_back(inertia);
    run.iterations = iter + 1;
    const bool converged =
        inertia == 0.0 || (std::isfinite(previous) && previous - inertia < params.tol * previous);
    if (converged) {
      break;
    }
    previous_centroids = centroids;
    centroids = update_means(train, a, centroids, k);
    previous = inertia;
  }
  run.centroids = std::move(centroids);
  return run;
}

}  // namespace

std::size_t KmeansParams::training_size(std::size_t n_items) const {
  std::size_t cap = sample_cap.value_or(256 * k);
  if (cap == 0) {
    return n_items;
  }
  return std::min(n_items, std::max(cap, k));
}

KmeansResult kmeans_fit(const EmbeddingMatrix& matrix, const KmeansParams& params) {
  const std::size_t n = matrix.n_items();
  const std::size_t k = params.k;
  const std::size_t dim = matrix.dim();
  if (k < 1 || k > n) {
    throw ConfigError("kmeans: k = " + std::to_string(k) + " must satisfy 1 <= k <= n_items = " +
                      std::to_string(n));
  }
  if (params.n_init < 1) {
    throw ConfigError("kmeans: n_init must be >= 1");
  }
  if (params.max_iter < 1) {
    throw ConfigError("kmeans: max_iter must be >= 1");
  }
  if (!(params.tol >= 0.0)) {
    throw ConfigError("kmeans: tol must be >= 0");
  }

  Rng rng(params.seed);
  const std::size_t n_train = params.training_size(n);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (n_train < n) {
    for (std::size_t i = 0; i < n_train; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
      std::swap(rows[i], rows[j]);
    }
    rows.resize(n_train);
    std::sort(rows.begin(), rows.end());
  }
  const EmbeddingMatrix train = n_train < n ? matrix.select_rows(rows) : matrix;

  const std::size_t distinct = count_distinct_rows(train, k);
  if (distinct < k) {
    throw ConfigError("kmeans: k = " + std::to_string(k) + " exceeds the " +
                      std::to_string(distinct) + " distinct training rows");
  }

  std::vector<float> centroids;
  KmeansModel model{EmbeddingMatrix(1, 1, {0.0f}), 0.0, 0, n_train, {}};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart < params.n_init; ++restart) {
    LloydRun run = lloyd(train, params.init == KmeansInit::kmeans_plus_plus
                                    ? init_plus_plus(train, k, rng)
                                    : init_random(train, k, rng),
                         k, params);
    // Later restarts must be strictly better, so ties keep the earlier one.
    if (run.trace.back() < best) {
      best = run.trace.back();
      centroids = std::move(run.centroids);
      model.inertia_trace = std::move(run.trace);
      model.iterations_run = run.iterations;
    }
  }

  Assignment full = assign_rows(matrix, EmbeddingMatrix(k, dim, centroids));
  repair_empty(matrix, full, centroids, k);
  model.centroids = EmbeddingMatrix(k, dim, std::move(centroids));
  model.inertia = chunked_sum(full.sq_dist);
  Partition partition(std::move(full.labels), static_cast<std::uint32_t>(k));
  return {std::move(model), std::move(partition)};
}

Partition assign(const KmeansModel& model, const EmbeddingMatrix& matrix) {
  if (matrix.dim() != model.centroids.dim()) {
    throw DataError("assign: matrix dim " + std::to_string(matrix.dim()) +
                    " does not match centroid dim " + std::to_string(model.centroids.dim()));
  }
  Assignment a = assign_rows(matrix, model.centroids);
  return Partition(std::move(a.labels), static_cast<std::uint32_t>(model.centroids.n_items()));
}

void save_kmeans_model(const KmeansModel& model, const std::filesystem::path& path) {
  save_embeddings(model.centroids, path);
  nlohmann::json sidecar;
  sidecar["k"] = model.centroids.n_items();
  sidecar["dim"] = model.centroids.dim();
  sidecar["inertia"] = model.inertia;
  sidecar["iterations"] = model.iterations_run;
  sidecar["training_rows"] = model.training_rows;
  auto sidecar_path = path;
  sidecar_path += ".json";
  std::ofstream out(sidecar_path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + sidecar_path.string() + " for writing");
  }
  out << sidecar.dump(2) << '\n';
  if (!out) {
    throw IoError("write failure on " + sidecar_path.string());
  }
}

}  // namespace embclust
