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

// End-to-end orchestration: embeddings -> (k-NN graph + Louvain | k-means)
// -> quality report -> cluster reports, plus seed sweeps and benchmarks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "embclust/kmeans.hpp"
#include "embclust/knn.hpp"
#include "embclust/metrics.hpp"
#include "embclust/partition.hpp"
#include "embclust/summarize.hpp"

namespace embclust {

enum class ClusterMode { kmeans, louvain };

struct PipelineConfig {
  std::filesystem::path embeddings;
  std::filesystem::path corpus;  // optional
  std::filesystem::path labels;  // optional corpus-format file; else corpus labels
  ClusterMode mode = ClusterMode::louvain;

  std::size_t kmeans_k = 0;
  KmeansInit kmeans_init = KmeansInit::kmeans_plus_plus;
  std::optional<std::size_t> sample_cap;
  std::size_t max_iter = 100;
  std::size_t n_init = 10;
  double tol = 1e-4;

  std::size_t knn_k = kDefaultKnnK;
  std::size_t block_size = kDefaultBlockSize;
  Weighting weighting;

  double resolution = 1.0;
  double min_modularity_gain = 1e-6;

  SummaryParams summary;
  std::filesystem::path stopwords;  // optional override file

  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  int threads = 0;  // 0 keeps the current worker count

  bool dump_graph = false;
  bool dump_hierarchy = false;

  /// Throws ConfigError.
  void validate(bool require_output = true) const;
};

/// Fills fields present in a JSON object; unknown keys are a ConfigError.
void apply_config_json(PipelineConfig& config, const std::string& json_text);
std::string config_to_json(const PipelineConfig& config);

ClusterMode parse_mode(const std::string& text);
std::string mode_name(ClusterMode mode);
Weighting parse_weighting(const std::string& text);
std::string weighting_name(const Weighting& weighting);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::filesystem::path partition_path;
  std::optional<std::filesystem::path> quality_path;
  std::filesystem::path reports_path;
  std::filesystem::path manifest_path;
  std::vector<std::filesystem::path> extra_paths;
  std::vector<StageTiming> timings;
  std::optional<QualityReport> quality;
  std::size_t n_clusters = 0;

  std::string to_json() const;
};

/// Stage names follow KNN / KMS / LVN; embedding is never timed since
/// embeddings are inputs.
inline constexpr const char* kStageLoad = "LOAD";
inline constexpr const char* kStageKnn = "KNN";
inline constexpr const char* kStageKmeans = "KMS";
inline constexpr const char* kStageLouvain = "LVN";
inline constexpr const char* kStageMetrics = "EVAL";
inline constexpr const char* kStageSummarize = "SUM";

/// Runs the whole flow into config.output_dir. In kmeans mode no graph is
/// built. On failure every file this run created is removed and the error
/// is rethrown.
RunManifest run_pipeline(const PipelineConfig& config);

struct ClusterOutcome {
  Partition partition;
  std::vector<StageTiming> timings;
};

/// Clustering stage only, in memory.
ClusterOutcome cluster_embeddings(const EmbeddingMatrix& matrix, const PipelineConfig& config,
                                  std::uint64_t seed);

struct SweepRow {
  std::uint64_t seed = 0;
  std::size_t n_clusters = 0;
  double purity = 0.0;
  double nmi = 0.0;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  SweepRow mean;    // seed field unused
  SweepRow stddev;  // sample standard deviation; zero for one row
  double mean_clusters = 0.0;
  double stddev_clusters = 0.0;

  std::string to_csv() const;
};

/// Per-seed rows plus mean and standard deviation. With an empty seed list
/// the seeds are base.seed + i for i < repeats; otherwise exactly `repeats`
/// seeds must be supplied. Labels are required.
SweepSummary run_sweep(const PipelineConfig& base, std::size_t repeats,
                       std::span<const std::uint64_t> seeds = {});

/// Same, on data already in memory.
SweepSummary sweep_in_memory(const EmbeddingMatrix& matrix, const LabelSet& labels,
                             const PipelineConfig& base, std::span<const std::uint64_t> seeds);

struct BenchRow {
  std::size_t n = 0;
  std::size_t d = 0;
  int threads = 1;
  double knn_seconds = 0.0;
  double cluster_seconds = 0.0;
  double metrics_seconds = 0.0;
  double summarize_seconds = 0.0;
  double total_seconds = 0.0;
  /// knn time at one thread divided by knn time at `threads`.
  double knn_speedup = 1.0;
};

struct BenchOptions {
  ClusterMode mode = ClusterMode::louvain;
  std::size_t n_clusters = 5;
  double separation = 10.0;
  int threads = 0;  // 0 means hardware threads
  std::uint64_t seed = 0;
  PipelineConfig base;  // clustering parameters
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row, ClusterMode mode);

/// Synthetic data per (n, d); each size runs at one thread and at
/// `threads`. In kmeans mode the knn column is the k-NN search time even
/// though clustering does not use it, so thread scaling stays comparable.
std::vector<BenchRow> run_bench(std::span<const std::pair<std::size_t, std::size_t>> sizes,
                                const BenchOptions& options);

}  // namespace embclust
