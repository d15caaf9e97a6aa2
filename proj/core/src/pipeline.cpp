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

#include "embclust/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "embclust/error.hpp"
#include "embclust/louvain.hpp"
#include "embclust/parallel.hpp"
#include "embclust/synth.hpp"

namespace embclust {
namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (!path.empty() && !std::filesystem::is_regular_file(path)) {
    throw ConfigError(std::string(what) + " file not found: " + path.string());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!text.empty() && text.back() != '\n') {
    out << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

struct LoadedInputs {
  std::optional<EmbeddingMatrix> matrix;
  std::optional<TextCorpus> corpus;
  std::optional<LabelSet> labels;
};

LoadedInputs load_inputs(const PipelineConfig& config) {
  LoadedInputs in;
  in.matrix = load_embeddings(config.embeddings);
  const std::size_t n = in.matrix->n_items();
  if (!config.corpus.empty()) {
    auto file = load_corpus(config.corpus);
    if (file.corpus.size() != n) {
      throw DataError("corpus has " + std::to_string(file.corpus.size()) +
                      " records but the embedding matrix has " + std::to_string(n) + " rows");
    }
    in.corpus = std::move(file.corpus);
    in.labels = std::move(file.labels);
  }
  if (!config.labels.empty()) {
    auto file = load_corpus(config.labels);
    if (!file.labels) {
      throw DataError("labels file " + config.labels.string() + " lacks a label on some record");
    }
    in.labels = std::move(file.labels);
  }
  if (in.labels && in.labels->size() != n) {
    throw DataError("labels cover " + std::to_string(in.labels->size()) + " items but the matrix has " +
                    std::to_string(n) + " rows");
  }
  return in;
}

KmeansParams kmeans_params(const PipelineConfig& config, std::uint64_t seed) {
  KmeansParams p;
  p.k = config.kmeans_k;
  p.init = config.kmeans_init;
  p.sample_cap = config.sample_cap;
  p.max_iter = config.max_iter;
  p.n_init = config.n_init;
  p.tol = config.tol;
  p.seed = seed;
  return p;
}

LouvainParams louvain_params(const PipelineConfig& config, std::uint64_t seed) {
  LouvainParams p;
  p.resolution = config.resolution;
  p.seed = seed;
  p.min_modularity_gain = config.min_modularity_gain;
  return p;
}

// Clustering with the k-NN graph built at most once across seeds.
class Clusterer {
 public:
  Clusterer(const EmbeddingMatrix& matrix, const PipelineConfig& config)
      : matrix_(matrix), config_(config) {}

  struct Outcome {
    Partition partition;
    std::optional<KmeansModel> model;
    std::optional<LouvainResult> louvain;
  };

  Outcome run(std::uint64_t seed, std::vector<StageTiming>& timings) {
    Outcome out;
    if (config_.mode == ClusterMode::kmeans) {
      const auto start = Clock::now();
      auto fit = kmeans_fit(matrix_, kmeans_params(config_, seed));
      timings.push_back({kStageKmeans, seconds_since(start)});
      out.partition = std::move(fit.partition);
      out.model = std::move(fit.model);
      return out;
    }
    if (!graph_) {
      const auto start = Clock::now();
      const auto neighbors = knn_search(matrix_, config_.knn_k, config_.block_size);
      graph_ = std::make_unique<KnnGraph>(build_graph(neighbors, config_.weighting));
      timings.push_back({kStageKnn, seconds_since(start)});
    }
    const auto start = Clock::now();
    auto result = louvain_cluster(*graph_, louvain_params(config_, seed));
    timings.push_back({kStageLouvain, seconds_since(start)});
    out.partition = result.final_partition;
    out.louvain = std::move(result);
    return out;
  }

  const KnnGraph* graph() const noexcept { return graph_.get(); }

 private:
  const EmbeddingMatrix& matrix_;
  const PipelineConfig& config_;
  std::unique_ptr<KnnGraph> graph_;
};

// Removes every registered path unless released.
class OutputGuard {
 public:
  explicit OutputGuard(std::filesystem::path dir) : dir_(std::move(dir)) {
    created_dir_ = !std::filesystem::exists(dir_);
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
      throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
  }
  ~OutputGuard() {
    if (released_) {
      return;
    }
    std::error_code ec;
    for (const auto& [p, existed] : paths_) {
      // A directory that predates the run is left alone.
      if (!existed || !std::filesystem::is_directory(p, ec)) {
        std::filesystem::remove_all(p, ec);
      }
    }
    if (created_dir_) {
      std::filesystem::remove(dir_, ec);  // only if empty
    }
  }
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;

  std::filesystem::path track(const std::string& name) {
    auto path = dir_ / name;
    std::error_code ec;
    paths_.emplace_back(path, std::filesystem::exists(path, ec));
    return path;
  }
  void release() { released_ = true; }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::filesystem::path, bool>> paths_;
  bool created_dir_ = false;
  bool released_ = false;
};

SweepRow mean_of(const std::vector<SweepRow>& rows, double& clusters) {
  SweepRow m;
  clusters = 0.0;
  for (const auto& r : rows) {
    m.purity += r.purity;
    m.nmi += r.nmi;
    clusters += static_cast<double>(r.n_clusters);
  }
  const double n = static_cast<double>(rows.size());
  m.purity /= n;
  m.nmi /= n;
  clusters /= n;
  m.n_clusters = static_cast<std::size_t>(std::llround(clusters));
  return m;
}

}  // namespace

void PipelineConfig::validate(bool require_output) const {
  if (embeddings.empty()) {
    throw ConfigError("an embeddings file is required");
  }
  require_file(embeddings, "embeddings");
  require_file(corpus, "corpus");
  require_file(labels, "labels");
  require_file(stopwords, "stopwords");
  if (mode == ClusterMode::kmeans && kmeans_k < 1) {
    throw ConfigError("kmeans mode requires k >= 1");
  }
  if (knn_k < 1) {
    throw ConfigError("knn k must be >= 1");
  }
  if (block_size < 1) {
    throw ConfigError("block size must be >= 1");
  }
  if (!(resolution > 0.0)) {
    throw ConfigError("resolution must be > 0");
  }
  if (n_init < 1) {
    throw ConfigError("n_init must be >= 1");
  }
  if (max_iter < 1) {
    throw ConfigError("max_iter must be >= 1");
  }
  if (!(tol >= 0.0)) {
    throw ConfigError("tol must be >= 0");
  }
  if (threads < 0) {
    throw ConfigError("threads must be >= 0");
  }
  if (require_output && output_dir.empty()) {
    throw ConfigError("an output directory is required");
  }
}

ClusterMode parse_mode(const std::string& text) {
  if (text == "kmeans") return ClusterMode::kmeans;
  if (text == "louvain") return ClusterMode::louvain;
  throw ConfigError("unknown mode '" + text + "' (expected kmeans or louvain)");
}

std::string mode_name(ClusterMode mode) {
  return mode == ClusterMode::kmeans ? "kmeans" : "louvain";
}

Weighting parse_weighting(const std::string& text) {
  if (text == "unit") return {WeightScheme::unit, 0.0};
  if (text == "inverse-distance") return {WeightScheme::inverse_distance, 0.0};
  if (text == "gaussian") return {WeightScheme::gaussian, 0.0};
  const std::string prefix = "gaussian:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      const double sigma = std::stod(text.substr(prefix.size()));
      if (sigma > 0.0) {
        return {WeightScheme::gaussian, sigma};
      }
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown weighting '" + text +
                    "' (expected unit, inverse-distance, gaussian or gaussian:<sigma>)");
}

std::string weighting_name(const Weighting& weighting) {
  switch (weighting.scheme) {
    case WeightScheme::unit:
      return "unit";
    case WeightScheme::inverse_distance:
      return "inverse-distance";
    case WeightScheme::gaussian:
      break;
  }
  if (weighting.sigma > 0.0) {
    std::ostringstream out;
    out.precision(17);
    out << "gaussian:" << weighting.sigma;
    return out.str();
  }
  return "gaussian";
}

void apply_config_json(PipelineConfig& config, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "embeddings") config.embeddings = value.get<std::string>();
      else if (key == "corpus") config.corpus = value.get<std::string>();
      else if (key == "labels") config.labels = value.get<std::string>();
      else if (key == "mode") config.mode = parse_mode(value.get<std::string>());
      else if (key == "k") config.kmeans_k = value.get<std::size_t>();
      else if (key == "init") {
        const auto s = value.get<std::string>();
        if (s == "kmeans++") config.kmeans_init = KmeansInit::kmeans_plus_plus;
        else if (s == "random") config.kmeans_init = KmeansInit::random;
        else throw ConfigError("unknown init '" + s + "'");
      } else if (key == "sample_cap") {
        if (value.is_null()) config.sample_cap.reset();
        else config.sample_cap = value.get<std::size_t>();
      } else if (key == "max_iter") config.max_iter = value.get<std::size_t>();
      else if (key == "n_init") config.n_init = value.get<std::size_t>();
      else if (key == "tol") config.tol = value.get<double>();
      else if (key == "knn_k") config.knn_k = value.get<std::size_t>();
      else if (key == "block_size") config.block_size = value.get<std::size_t>();
      else if (key == "weighting") config.weighting = parse_weighting(value.get<std::string>());
      else if (key == "resolution") config.resolution = value.get<double>();
      else if (key == "min_modularity_gain") config.min_modularity_gain = value.get<double>();
      else if (key == "top_bigrams") config.summary.top_bigrams = value.get<std::size_t>();
      else if (key == "min_term_frequency") config.summary.min_term_frequency = value.get<std::size_t>();
      else if (key == "max_terms") config.summary.max_terms = value.get<std::size_t>();
      else if (key == "representatives") config.summary.representatives = value.get<std::size_t>();
      else if (key == "stopwords") config.stopwords = value.get<std::string>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "output") config.output_dir = value.get<std::string>();
      else if (key == "threads") config.threads = value.get<int>();
      else if (key == "dump_graph") config.dump_graph = value.get<bool>();
      else if (key == "dump_hierarchy") config.dump_hierarchy = value.get<bool>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
}

std::string config_to_json(const PipelineConfig& config) {
  json j;
  j["embeddings"] = config.embeddings.string();
  j["corpus"] = config.corpus.string();
  j["labels"] = config.labels.string();
  j["mode"] = mode_name(config.mode);
  j["k"] = config.kmeans_k;
  j["init"] = config.kmeans_init == KmeansInit::kmeans_plus_plus ? "kmeans++" : "random";
  j["sample_cap"] = config.sample_cap ? json(*config.sample_cap) : json(nullptr);
  j["max_iter"] = config.max_iter;
  j["n_init"] = config.n_init;
  j["tol"] = config.tol;
  j["knn_k"] = config.knn_k;
  j["block_size"] = config.block_size;
  j["weighting"] = weighting_name(config.weighting);
  j["resolution"] = config.resolution;
  j["min_modularity_gain"] = config.min_modularity_gain;
  j["top_bigrams"] = config.summary.top_bigrams;
  j["min_term_frequency"] = config.summary.min_term_frequency;
  j["max_terms"] = config.summary.max_terms;
  j["representatives"] = config.summary.representatives;
  j["stopwords"] = config.stopwords.string();
  j["seed"] = config.seed;
  j["output"] = config.output_dir.string();
  j["threads"] = config.threads;
  j["dump_graph"] = config.dump_graph;
  j["dump_hierarchy"] = config.dump_hierarchy;
  return j.dump(2);
}

std::string RunManifest::to_json() const {
  json j;
  j["partition"] = partition_path.string();
  j["quality"] = quality_path ? json(quality_path->string()) : json(nullptr);
  j["cluster_reports"] = reports_path.string();
  j["manifest"] = manifest_path.string();
  j["extra"] = json::array();
  for (const auto& p : extra_paths) {
    j["extra"].push_back(p.string());
  }
  j["n_clusters"] = n_clusters;
  j["timings"] = json::array();
  for (const auto& t : timings) {
    j["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  }
  if (quality) {
    j["purity"] = quality->purity;
    j["nmi"] = quality->nmi;
  }
  return j.dump(2);
}

ClusterOutcome cluster_embeddings(const EmbeddingMatrix& matrix, const PipelineConfig& config,
                                  std::uint64_t seed) {
  Clusterer clusterer(matrix, config);
  ClusterOutcome out;
  out.partition = clusterer.run(seed, out.timings).partition;
  return out;
}

RunManifest run_pipeline(const PipelineConfig& config) {
  config.validate();
  std::optional<parallel::ThreadScope> threads;
  if (config.threads > 0) {
    threads.emplace(config.threads);
  }

  OutputGuard guard(config.output_dir);
  RunManifest manifest;

  auto start = Clock::now();
  const LoadedInputs in = load_inputs(config);
  const StopWords stopwords =
      config.stopwords.empty() ? default_stopwords() : load_stopwords(config.stopwords);
  manifest.timings.push_back({kStageLoad, seconds_since(start)});

  Clusterer clusterer(*in.matrix, config);
  auto outcome = clusterer.run(config.seed, manifest.timings);
  const Partition& partition = outcome.partition;
  manifest.n_clusters = partition.n_clusters();

  manifest.partition_path = guard.track("partition.txt");
  save_partition(partition, manifest.partition_path);

  if (config.dump_graph && clusterer.graph() != nullptr) {
    manifest.extra_paths.push_back(guard.track("graph.txt"));
    save_edge_list(*clusterer.graph(), manifest.extra_paths.back());
  }
  if (config.dump_hierarchy && outcome.louvain) {
    manifest.extra_paths.push_back(guard.track("hierarchy"));
    save_hierarchy(*outcome.louvain, manifest.extra_paths.back());
  }
  if (outcome.model) {
    manifest.extra_paths.push_back(guard.track("model.embv"));
    auto sidecar = guard.track("model.embv.json");
    save_kmeans_model(*outcome.model, manifest.extra_paths.back());
    manifest.extra_paths.push_back(sidecar);
  }

  if (in.labels) {
    start = Clock::now();
    manifest.quality = evaluate(partition, *in.labels);
    manifest.timings.push_back({kStageMetrics, seconds_since(start)});
    manifest.quality_path = guard.track("quality.json");
    write_text(*manifest.quality_path, manifest.quality->to_json());
  }

  start = Clock::now();
  const auto reports = summarize_clusters(*in.matrix, in.corpus ? &*in.corpus : nullptr, partition,
                                          stopwords, config.summary);
  manifest.timings.push_back({kStageSummarize, seconds_since(start)});
  manifest.reports_path = guard.track("clusters.json");
  write_text(manifest.reports_path, reports_to_json(reports, config.summary));
  manifest.extra_paths.push_back(guard.track("clusters.csv"));
  write_text(manifest.extra_paths.back(), reports_to_csv(reports));

  manifest.manifest_path = guard.track("manifest.json");
  json doc = json::parse(manifest.to_json());
  doc["config"] = json::parse(config_to_json(config));
  if (config.mode == ClusterMode::kmeans) {
    doc["kmeans_training_rows"] = kmeans_params(config, config.seed).training_size(in.matrix->n_items());
  }
  write_text(manifest.manifest_path, doc.dump(2));

  guard.release();
  return manifest;
}

std::string SweepSummary::to_csv() const {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "seed,n_clusters,purity,nmi\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << r.n_clusters << ',' << r.purity << ',' << r.nmi << '\n';
  }
  out << "mean," << mean_clusters << ',' << mean.purity << ',' << mean.nmi << '\n';
  out << "stddev," << stddev_clusters << ',' << stddev.purity << ',' << stddev.nmi << '\n';
  return out.str();
}

SweepSummary sweep_in_memory(const EmbeddingMatrix& matrix, const LabelSet& labels,
                             const PipelineConfig& base, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) {
    throw ConfigError("sweep needs at least one seed");
  }
  if (labels.size() != matrix.n_items()) {
    throw DataError("sweep: labels do not align with the embedding matrix");
  }
  Clusterer clusterer(matrix, base);
  SweepSummary s;
  for (const auto seed : seeds) {
    std::vector<StageTiming> timings;
    const auto outcome = clusterer.run(seed, timings);
    const auto q = evaluate(outcome.partition, labels);
    s.rows.push_back({seed, q.n_clusters_pred, q.purity, q.nmi});
  }
  s.mean = mean_of(s.rows, s.mean_clusters);
  if (s.rows.size() > 1) {
    double vp = 0.0, vn = 0.0, vc = 0.0;
    for (const auto& r : s.rows) {
      vp += (r.purity - s.mean.purity) * (r.purity - s.mean.purity);
      vn += (r.nmi - s.mean.nmi) * (r.nmi - s.mean.nmi);
      const double dc = static_cast<double>(r.n_clusters) - s.mean_clusters;
      vc += dc * dc;
    }
    const double denom = static_cast<double>(s.rows.size() - 1);
    s.stddev.purity = std::sqrt(vp / denom);
    s.stddev.nmi = std::sqrt(vn / denom);
    s.stddev_clusters = std::sqrt(vc / denom);
  }
  return s;
}

SweepSummary run_sweep(const PipelineConfig& base, std::size_t repeats,
                       std::span<const std::uint64_t> seeds) {
  if (repeats < 1) {
    throw ConfigError("sweep: repeats must be >= 1");
  }
  base.validate(false);
  std::vector<std::uint64_t> chosen(seeds.begin(), seeds.end());
  if (chosen.empty()) {
    for (std::size_t i = 0; i < repeats; ++i) {
      chosen.push_back(base.seed + i);
    }
  } else if (chosen.size() != repeats) {
    throw ConfigError("sweep: " + std::to_string(chosen.size()) + " seeds given for " +
                      std::to_string(repeats) + " repeats");
  }
  std::optional<parallel::ThreadScope> threads;
  if (base.threads > 0) {
    threads.emplace(base.threads);
  }
  const auto in = load_inputs(base);
  if (!in.labels) {
    throw ConfigError("sweep requires labels (a labelled corpus or --labels)");
  }
  return sweep_in_memory(*in.matrix, *in.labels, base, chosen);
}

std::string bench_csv_header() {
  return "n,d,mode,threads,knn_s,cluster_s,metrics_s,summarize_s,total_s,knn_speedup";
}

std::string bench_csv_row(const BenchRow& row, ClusterMode mode) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << row.n << ',' << row.d << ',' << mode_name(mode) << ',' << row.threads << ','
      << row.knn_seconds << ',' << row.cluster_seconds << ',' << row.metrics_seconds << ','
      << row.summarize_seconds << ',' << row.total_seconds << ',' << row.knn_speedup;
  return out.str();
}

std::vector<BenchRow> run_bench(std::span<const std::pair<std::size_t, std::size_t>> sizes,
                                const BenchOptions& options) {
  const int max_threads = options.threads > 0 ? options.threads : parallel::hardware_threads();
  std::vector<int> thread_counts{1};
  if (max_threads > 1) {
    thread_counts.push_back(max_threads);
  }
  std::vector<BenchRow> rows;
  for (const auto& [n, d] : sizes) {
    MixtureSpec spec;
    spec.n_clusters = options.n_clusters;
    spec.n_items = n;
    spec.dim = d;
    spec.separation = options.separation;
    spec.seed = options.seed;
    const auto data = generate(spec);

    double knn_single = 0.0;
    for (const int t : thread_counts) {
      parallel::ThreadScope scope(t);
      BenchRow row;
      row.n = n;
      row.d = d;
      row.threads = t;
      const auto total_start = Clock::now();

      auto start = Clock::now();
      const auto neighbors = knn_search(data.embeddings, options.base.knn_k, options.base.block_size);
      const auto graph = build_graph(neighbors, options.base.weighting);
      row.knn_seconds = seconds_since(start);

      start = Clock::now();
      Partition partition;
      if (options.mode == ClusterMode::kmeans) {
        auto params = kmeans_params(options.base, options.seed);
        if (params.k == 0) {
          params.k = options.n_clusters;
        }
        partition = kmeans_fit(data.embeddings, params).partition;
      } else {
        partition = louvain_cluster(graph, louvain_params(options.base, options.seed)).final_partition;
      }
      row.cluster_seconds = seconds_since(start);

      start = Clock::now();
      (void)evaluate(partition, data.labels);
      row.metrics_seconds = seconds_since(start);

      start = Clock::now();
      (void)summarize_clusters(data.embeddings, &data.corpus, partition, default_stopwords(),
                               options.base.summary);
      row.summarize_seconds = seconds_since(start);
      row.total_seconds = seconds_since(total_start);

      if (t == 1) {
        knn_single = row.knn_seconds;
      }
      row.knn_speedup = row.knn_seconds > 0.0 ? knn_single / row.knn_seconds : 1.0;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace embclust
