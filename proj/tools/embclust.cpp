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

// embclust: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "embclust/embedstore.hpp"
#include "embclust/error.hpp"
#include "embclust/kmeans.hpp"
#include "embclust/knn.hpp"
#include "embclust/louvain.hpp"
#include "embclust/metrics.hpp"
#include "embclust/parallel.hpp"
#include "embclust/pipeline.hpp"
#include "embclust/summarize.hpp"
#include "embclust/synth.hpp"

namespace fs = std::filesystem;
using namespace embclust;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

fs::path output_path(const std::string& given) {
  fs::path p(given);
  if (p.is_relative()) {
    if (const char* root = std::getenv("EMBCLUST_OUTPUT_ROOT"); root && *root) {
      return fs::path(root) / p;
    }
  }
  return p;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
}

void write_or_print(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(output_path(out), std::ios::trunc);
  if (!f) {
    throw IoError("cannot open " + out + " for writing");
  }
  f << text;
}

// Flags shared by pipeline and sweep. Explicit flags override the JSON config.
struct PipelineFlags {
  std::string config_file;
  std::string embeddings, corpus, labels, mode = "louvain", init = "kmeans++", weighting = "gaussian";
  std::string stopwords, output;
  std::size_t k = 0, knn_k = kDefaultKnnK, block_size = kDefaultBlockSize, sample_cap = 0;
  std::size_t max_iter = 100, n_init = 10, top_bigrams = 10, min_term_frequency = 5, representatives = 5;
  double tol = 1e-4, resolution = 1.0, min_gain = 1e-6;
  std::uint64_t seed = 0;
  int threads = 0;
  bool dump_graph = false, dump_hierarchy = false;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> setters;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file; explicit flags win")->check(CLI::ExistingFile);
    bind(app->add_option("--embeddings,-e", embeddings, "Embedding file (EMBV0001)"),
         [this](auto& c) { c.embeddings = embeddings; });
    bind(app->add_option("--corpus", corpus, "Corpus JSON-lines file"),
         [this](auto& c) { c.corpus = corpus; });
    bind(app->add_option("--labels", labels, "Corpus-format file whose labels are the ground truth"),
         [this](auto& c) { c.labels = labels; });
    bind(app->add_option("--mode", mode, "kmeans or louvain")->check(CLI::IsMember({"kmeans", "louvain"})),
         [this](auto& c) { c.mode = parse_mode(mode); });
    bind(app->add_option("--k", k, "Cluster count (kmeans mode)"), [this](auto& c) { c.kmeans_k = k; });
    bind(app->add_option("--init", init, "kmeans++ or random")->check(CLI::IsMember({"kmeans++", "random"})),
         [this](auto& c) {
           c.kmeans_init = init == "random" ? KmeansInit::random : KmeansInit::kmeans_plus_plus;
         });
    bind(app->add_option("--sample-cap", sample_cap, "k-means training rows (0 = all; default 256 x k)"),
         [this](auto& c) { c.sample_cap = sample_cap; });
    bind(app->add_option("--max-iter", max_iter), [this](auto& c) { c.max_iter = max_iter; });
    bind(app->add_option("--n-init", n_init, "k-means restarts; the lowest inertia wins"),
         [this](auto& c) { c.n_init = n_init; });
    bind(app->add_option("--tol", tol), [this](auto& c) { c.tol = tol; });
    bind(app->add_option("--knn-k", knn_k, "Neighbors per node in the k-NN graph"),
         [this](auto& c) { c.knn_k = knn_k; });
    bind(app->add_option("--block-size", block_size), [this](auto& c) { c.block_size = block_size; });
    bind(app->add_option("--weighting", weighting, "unit | inverse-distance | gaussian[:sigma]"),
         [this](auto& c) { c.weighting = parse_weighting(weighting); });
    bind(app->add_option("--resolution", resolution), [this](auto& c) { c.resolution = resolution; });
    bind(app->add_option("--min-gain", min_gain, "Stop when a pass gains less modularity"),
         [this](auto& c) { c.min_modularity_gain = min_gain; });
    bind(app->add_option("--top-bigrams", top_bigrams),
         [this](auto& c) { c.summary.top_bigrams = top_bigrams; });
    bind(app->add_option("--min-term-frequency", min_term_frequency),
         [this](auto& c) { c.summary.min_term_frequency = min_term_frequency; });
    bind(app->add_option("--representatives", representatives),
         [this](auto& c) { c.summary.representatives = representatives; });
    bind(app->add_option("--stopwords", stopwords, "Stopword file, one per line"),
         [this](auto& c) { c.stopwords = stopwords; });
    bind(app->add_option("--seed", seed), [this](auto& c) { c.seed = seed; });
    bind(app->add_option("--out-dir,-o", output, "Output directory"),
         [this](auto& c) { c.output_dir = output_path(output); });
    bind(app->add_option("--threads", threads, "Worker threads (0 = default)"),
         [this](auto& c) { c.threads = threads; });
    bind(app->add_flag("--dump-graph", dump_graph, "Write the k-NN edge list"),
         [this](auto& c) { c.dump_graph = dump_graph; });
    bind(app->add_flag("--dump-hierarchy", dump_hierarchy, "Write every Louvain level"),
         [this](auto& c) { c.dump_hierarchy = dump_hierarchy; });
  }

  void bind(CLI::Option* opt, std::function<void(PipelineConfig&)> set) {
    setters.emplace_back(opt, std::move(set));
  }

  PipelineConfig build() const {
    PipelineConfig config;
    if (!config_file.empty()) {
      apply_config_json(config, read_file(config_file));
      if (!config.output_dir.empty()) {
        config.output_dir = output_path(config.output_dir.string());
      }
    }
    for (const auto& [opt, set] : setters) {
      if (opt->count() > 0) {
        set(config);
      }
    }
    return config;
  }
};

std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> sizes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) {
      continue;
    }
    const auto x = item.find('x');
    try {
      if (x == std::string::npos) {
        throw std::invalid_argument(item);
      }
      sizes.emplace_back(std::stoull(item.substr(0, x)), std::stoull(item.substr(x + 1)));
    } catch (const std::exception&) {
      throw ConfigError("bad size '" + item + "' (expected NxD)");
    }
  }
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embclust: k-NN graphs, k-means and Louvain clustering over text embeddings"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads-global", threads, "Worker threads for every stage (also EMBCLUST_THREADS)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a planted Gaussian mixture with texts and labels");
  MixtureSpec spec;
  std::vector<double> proportions;
  bool multinomial = false;
  std::string synth_out;
  synth->add_option("--clusters", spec.n_clusters)->capture_default_str();
  synth->add_option("--items", spec.n_items)->capture_default_str();
  synth->add_option("--dim", spec.dim)->capture_default_str();
  synth->add_option("--separation", spec.separation, "Center distance in units of sigma")->capture_default_str();
  synth->add_option("--proportions", proportions, "Cluster proportions summing to 1")->delimiter(',');
  synth->add_flag("--multinomial", multinomial, "Draw sizes at random instead of exact quotas");
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--out-dir,-o", synth_out, "Writes embeddings.embv and corpus.jsonl")->required();

  // knn
  auto* knn = app.add_subcommand("knn", "Build the symmetrized k-NN graph");
  std::string knn_in, knn_out, knn_weighting = "gaussian";
  std::size_t knn_k = kDefaultKnnK, knn_block = kDefaultBlockSize;
  knn->add_option("--embeddings,-e", knn_in)->required();
  knn->add_option("--k", knn_k)->capture_default_str();
  knn->add_option("--block-size", knn_block)->capture_default_str();
  knn->add_option("--weighting", knn_weighting, "unit | inverse-distance | gaussian[:sigma]")->capture_default_str();
  knn->add_option("--out,-o", knn_out, "Edge list 'u v weight'")->required();

  // kmeans
  auto* km = app.add_subcommand("kmeans", "k-means on the embeddings");
  std::string km_in, km_out, km_init = "kmeans++";
  KmeansParams km_params;
  std::size_t km_cap = 0;
  km->add_option("--embeddings,-e", km_in)->required();
  km->add_option("--k", km_params.k)->required();
  km->add_option("--init", km_init)->check(CLI::IsMember({"kmeans++", "random"}))->capture_default_str();
  auto* km_cap_opt = km->add_option("--sample-cap", km_cap, "Training rows (0 = all; default 256 x k)");
  km->add_option("--max-iter", km_params.max_iter)->capture_default_str();
  km->add_option("--n-init", km_params.n_init, "Restarts; the lowest inertia wins")->capture_default_str();
  km->add_option("--tol", km_params.tol)->capture_default_str();
  km->add_option("--seed", km_params.seed)->capture_default_str();
  km->add_option("--out-dir,-o", km_out)->required();

  // louvain
  auto* lv = app.add_subcommand("louvain", "Louvain on a k-NN graph (built from embeddings or loaded)");
  std::string lv_in, lv_graph, lv_out, lv_weighting = "gaussian";
  std::size_t lv_k = kDefaultKnnK, lv_nodes = 0;
  LouvainParams lv_params;
  lv->add_option("--embeddings,-e", lv_in);
  lv->add_option("--graph", lv_graph, "Edge list instead of embeddings");
  lv->add_option("--nodes", lv_nodes, "Node count for --graph (default: max id + 1)");
  lv->add_option("--knn-k", lv_k)->capture_default_str();
  lv->add_option("--weighting", lv_weighting)->capture_default_str();
  lv->add_option("--resolution", lv_params.resolution)->capture_default_str();
  lv->add_option("--min-gain", lv_params.min_modularity_gain)->capture_default_str();
  lv->add_option("--seed", lv_params.seed)->capture_default_str();
  lv->add_option("--out-dir,-o", lv_out)->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Full flow: cluster, evaluate, summarize");
  PipelineFlags pipe_flags;
  pipe_flags.add(pipe);

  // eval
  auto* ev = app.add_subcommand("eval", "Purity and NMI of a partition against labels");
  std::string ev_partition, ev_labels, ev_out;
  bool ev_csv = false;
  ev->add_option("--partition,-p", ev_partition)->required()->check(CLI::ExistingFile);
  ev->add_option("--labels,-l", ev_labels, "Labelled corpus file")->required()->check(CLI::ExistingFile);
  ev->add_flag("--csv", ev_csv, "Emit a CSV row instead of JSON");
  ev->add_option("--out,-o", ev_out);

  // summarize
  auto* sm = app.add_subcommand("summarize", "Per-cluster terms, bigrams and representatives");
  std::string sm_emb, sm_corpus, sm_partition, sm_out, sm_stop;
  SummaryParams sm_params;
  bool sm_csv = false;
  sm->add_option("--embeddings,-e", sm_emb)->required();
  sm->add_option("--corpus", sm_corpus)->required();
  sm->add_option("--partition,-p", sm_partition)->required();
  sm->add_option("--stopwords", sm_stop);
  sm->add_option("--top-bigrams", sm_params.top_bigrams)->capture_default_str();
  sm->add_option("--min-term-frequency", sm_params.min_term_frequency)->capture_default_str();
  sm->add_option("--representatives", sm_params.representatives)->capture_default_str();
  sm->add_flag("--csv", sm_csv);
  sm->add_option("--out,-o", sm_out);

  // sweep
  auto* sw = app.add_subcommand("sweep", "Repeat clustering over seeds and aggregate quality");
  PipelineFlags sw_flags;
  sw_flags.add(sw);
  std::size_t sw_repeats = 5;
  std::vector<std::uint64_t> sw_seeds;
  std::string sw_out;
  sw->add_option("--repeats", sw_repeats)->capture_default_str();
  sw->add_option("--seeds", sw_seeds)->delimiter(',');
  sw->add_option("--csv-out", sw_out);

  // bench
  auto* bn = app.add_subcommand("bench", "Stage timings on synthetic data");
  std::string bn_sizes, bn_mode = "louvain", bn_out;
  BenchOptions bn_opts;
  bn->add_option("--sizes", bn_sizes, "Comma-separated NxD list, e.g. 1000x128,10000x128");
  bn->add_option("--mode", bn_mode)->check(CLI::IsMember({"kmeans", "louvain"}))->capture_default_str();
  bn->add_option("--threads", bn_opts.threads, "Thread count compared against 1 (0 = hardware)");
  bn->add_option("--clusters", bn_opts.n_clusters)->capture_default_str();
  bn->add_option("--separation", bn_opts.separation)->capture_default_str();
  bn->add_option("--knn-k", bn_opts.base.knn_k)->capture_default_str();
  bn->add_option("--seed", bn_opts.seed)->capture_default_str();
  bn->add_option("--out,-o", bn_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (threads > 0) {
      parallel::set_num_threads(threads);
    }

    if (*synth) {
      spec.proportions = proportions;
      spec.size_mode = multinomial ? SizeMode::multinomial : SizeMode::quota;
      const auto data = generate(spec);
      const auto dir = output_path(synth_out);
      make_dir(dir);
      save_embeddings(data.embeddings, dir / "embeddings.embv");
      save_corpus(data.corpus, &data.labels, dir / "corpus.jsonl");
      std::cout << "wrote " << spec.n_items << " x " << spec.dim << " embeddings and corpus to "
                << dir.string() << '\n';
    } else if (*knn) {
      const auto matrix = load_embeddings(knn_in);
      const auto graph = build_graph(knn_search(matrix, knn_k, knn_block), parse_weighting(knn_weighting));
      save_edge_list(graph, output_path(knn_out));
      const auto s = degree_stats(graph);
      std::cout << "nodes " << graph.n_nodes() << " edges " << s.n_edges << " degree min " << s.min_degree
                << " max " << s.max_degree << " mean " << s.mean_degree << '\n';
    } else if (*km) {
      km_params.init = km_init == "random" ? KmeansInit::random : KmeansInit::kmeans_plus_plus;
      if (km_cap_opt->count() > 0) {
        km_params.sample_cap = km_cap;
      }
      const auto matrix = load_embeddings(km_in);
      const auto fit = kmeans_fit(matrix, km_params);
      const auto dir = output_path(km_out);
      make_dir(dir);
      save_partition(fit.partition, dir / "partition.txt");
      save_kmeans_model(fit.model, dir / "model.embv");
      std::cout << "k " << km_params.k << " inertia " << fit.model.inertia << " iterations "
                << fit.model.iterations_run << " training rows " << fit.model.training_rows << '\n';
    } else if (*lv) {
      if (lv_in.empty() == lv_graph.empty()) {
        throw ConfigError("louvain needs exactly one of --embeddings or --graph");
      }
      const auto graph = lv_graph.empty()
                             ? build_graph(knn_search(load_embeddings(lv_in), lv_k), parse_weighting(lv_weighting))
                             : load_edge_list(lv_graph, lv_nodes);
      const auto result = louvain_cluster(graph, lv_params);
      const auto dir = output_path(lv_out);
      make_dir(dir);
      save_partition(result.final_partition, dir / "partition.txt");
      save_hierarchy(result, dir / "hierarchy");
      std::cout << "communities " << result.final_partition.n_clusters() << " passes " << result.n_passes()
                << " modularity " << result.modularity_trace.back() << '\n';
    } else if (*pipe) {
      const auto manifest = run_pipeline(pipe_flags.build());
      std::cout << manifest.to_json() << '\n';
    } else if (*ev) {
      const auto partition = load_partition(ev_partition);
      const auto corpus = load_corpus(ev_labels);
      if (!corpus.labels) {
        throw DataError("labels file has records without a label");
      }
      const auto report = evaluate(partition, *corpus.labels);
      write_or_print(ev_csv ? QualityReport::csv_header() + "\n" + report.to_csv_row() + "\n"
                            : report.to_json() + "\n",
                     ev_out);
    } else if (*sm) {
      const auto matrix = load_embeddings(sm_emb);
      const auto corpus = load_corpus(sm_corpus);
      const auto partition = load_partition(sm_partition);
      const auto stop = sm_stop.empty() ? default_stopwords() : load_stopwords(sm_stop);
      const auto reports = summarize_clusters(matrix, &corpus.corpus, partition, stop, sm_params);
      write_or_print(sm_csv ? reports_to_csv(reports) : reports_to_json(reports, sm_params) + "\n", sm_out);
    } else if (*sw) {
      const auto summary = run_sweep(sw_flags.build(), sw_seeds.empty() ? sw_repeats : sw_seeds.size(), sw_seeds);
      write_or_print(summary.to_csv(), sw_out);
    } else if (*bn) {
      bn_opts.mode = parse_mode(bn_mode);
      const auto sizes = parse_sizes(bn_sizes);
      std::ostringstream csv;
      csv << bench_csv_header() << '\n';
      for (const auto& row : run_bench(sizes, bn_opts)) {
        csv << bench_csv_row(row, bn_opts.mode) << '\n';
      }
      write_or_print(csv.str(), bn_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
