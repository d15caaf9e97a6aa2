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

// Acceptance suite: one PASS/FAIL line per criterion. Run all criteria, or a
// single one with `--criterion N`. Exit status is nonzero if any selected
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "embclust/knn.hpp"
#include "embclust/louvain.hpp"
#include "embclust/metrics.hpp"
#include "embclust/parallel.hpp"
#include "embclust/pipeline.hpp"
#include "embclust/summarize.hpp"
#include "embclust/synth.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace embclust;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

LabelSet dense_labels(const std::vector<std::uint32_t>& v) {
  return LabelSet(v, *std::max_element(v.begin(), v.end()) + 1);
}

// Criterion 1: purity and NMI against brute-force references.
Verdict metric_oracles() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  double worst_purity = 0.0;
  double worst_nmi = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const std::uint32_t kp = 1 + rng() % 10;
    const std::uint32_t kt = 1 + rng() % 10;
    std::vector<std::uint32_t> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<std::uint32_t>(rng() % kp);
      t[i] = static_cast<std::uint32_t>(rng() % kt);
    }
    const auto pred = Partition::from_labels(p);
    const auto truth = dense_labels(t);
    worst_purity = std::max(worst_purity, std::abs(purity(pred, truth) - oracle::purity(p, t)));
    worst_nmi = std::max(worst_nmi, std::abs(nmi(pred, truth) - oracle::nmi(p, t)));
  }
  Verdict v;
  v.pass = worst_purity <= 1e-9 && worst_nmi <= 1e-9;

  const double hand = purity(Partition::from_labels(std::vector<std::uint32_t>{0, 0, 1, 1}),
                             dense_labels({0, 1, 1, 1}));
  const std::vector<std::uint32_t> same = {0, 1, 2, 0, 1, 2, 2};
  const double ident = nmi(Partition::from_labels(same), dense_labels(same));
  const double indep = nmi(Partition::from_labels(std::vector<std::uint32_t>{0, 0, 1, 1}),
                           dense_labels({0, 1, 0, 1}));
  v.pass = v.pass && hand == 0.75 && std::abs(ident - 1.0) <= 1e-12 && std::abs(indep) <= 1e-12;
  const double elapsed = seconds_since(start);
  v.pass = v.pass && elapsed < 10.0;
  v.detail = "max|dpurity|=" + fmt("%.2e", worst_purity) + " max|dnmi|=" + fmt("%.2e", worst_nmi) +
             " purity(hand)=" + fmt("%.17g", hand) + " nmi(identical)=" + fmt("%.17g", ident) +
             " nmi(independent)=" + fmt("%.3g", indep) + " time=" + fmt("%.2fs", elapsed) + " (limit 10s)";
  return v;
}

// Criterion 2: exact k-NN against the two-loop reference, for every block size.
Verdict knn_exactness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2);
  std::size_t mismatches = 0;
  std::size_t block_mismatches = 0;
  std::size_t largest_n = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = inst < 5 ? 2000 : 21 + rng() % 1980;
    const std::size_t d = 1 + rng() % 64;
    const std::size_t k = 1 + rng() % 20;
    largest_n = std::max(largest_n, n);
    const auto raw = oracle::random_gaussian(n, d, 100 + inst);
    const EmbeddingMatrix m(n, d, oracle::flatten(raw));
    const auto expected = oracle::knn(raw, k);
    std::vector<std::set<std::uint32_t>> ref(n);
    for (std::size_t q = 0; q < n; ++q) {
      for (const auto& [dist, id] : expected[q]) {
        ref[q].insert(id);
      }
    }
    std::vector<std::set<std::uint32_t>> first;
    for (std::size_t block : {std::size_t{1}, std::size_t{7}, std::size_t{64}, n}) {
      const auto nn = knn_search(m, k, block);
      std::vector<std::set<std::uint32_t>> got(n);
      for (std::size_t q = 0; q < n; ++q) {
        for (const auto& nb : nn.of(q)) {
          got[q].insert(nb.id);
        }
        mismatches += got[q] != ref[q] ? 1 : 0;
      }
      if (first.empty()) {
        first = got;
      } else {
        block_mismatches += first != got ? 1 : 0;
      }
    }
  }
  const double elapsed = seconds_since(start);
  Verdict v;
  v.pass = mismatches == 0 && block_mismatches == 0 && elapsed < 60.0;
  v.detail = "50 instances (n<=" + std::to_string(largest_n) + ", d<=64, k<=20), blocks {1,7,64,n}: " +
             std::to_string(mismatches) + " query mismatches, " + std::to_string(block_mismatches) +
             " block disagreements, time=" + fmt("%.1fs", elapsed) + " (limit 60s)";
  return v;
}

KnnGraph random_weighted_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> e;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (u(rng) < p) {
        e.push_back({i, j, 0.05 + u(rng)});
      }
    }
  }
  return KnnGraph(n, e);
}

// Criterion 3: Louvain bookkeeping, monotone trace and reference graphs.
Verdict louvain_correctness() {
  std::mt19937_64 rng(3);
  double worst_gain_error = 0.0;
  std::size_t moves = 0;
  bool trace_ok = true;
  for (int g = 0; g < 20; ++g) {
    const std::size_t n = 20 + rng() % 41;
    const auto graph = random_weighted_graph(n, 3.0 / static_cast<double>(n) + 0.05, rng);
    std::vector<oracle::WEdge> edges;
    for (const auto& e : graph.edges()) {
      edges.push_back({e.u, e.v, e.weight});
    }
    const double gamma = g % 4 == 3 ? 1.5 : 1.0;
    std::vector<std::uint32_t> current(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      current[i] = i;
    }
    double q_before = oracle::modularity(n, edges, current, gamma);
    LouvainParams params;
    params.seed = static_cast<std::uint64_t>(g);
    params.resolution = gamma;
    params.on_move = [&](const LouvainMove& m) {
      for (std::size_t i = 0; i < n; ++i) {
        current[i] = m.community[m.node_of_original[i]];
      }
      const double q_after = oracle::modularity(n, edges, current, gamma);
      worst_gain_error = std::max(worst_gain_error, std::abs((q_after - q_before) - m.gain));
      q_before = q_after;
      ++moves;
    };
    const auto r = louvain_cluster(graph, params);
    for (std::size_t i = 1; i < r.modularity_trace.size(); ++i) {
      trace_ok = trace_ok && r.modularity_trace[i] >= r.modularity_trace[i - 1];
    }
  }

  std::vector<Edge> bar;
  for (std::uint32_t base : {0u, 5u}) {
    for (std::uint32_t i = 0; i < 5; ++i) {
      for (std::uint32_t j = i + 1; j < 5; ++j) {
        bar.push_back({base + i, base + j, 1.0});
      }
    }
  }
  bar.push_back({4, 5, 1.0});
  const auto split = louvain_cluster(KnnGraph(10, bar)).final_partition;
  bool cliques = split.n_clusters() == 2;
  for (std::uint32_t i = 0; i < 10; ++i) {
    cliques = cliques && split[i] == split[i < 5 ? 0 : 5];
  }
  cliques = cliques && split[0] != split[5];

  const KnnGraph two(6, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}, {3, 5, 1.0}, {4, 5, 1.0}});
  const double q_two = modularity(two, Partition({0, 0, 0, 1, 1, 1}, 2));

  Verdict v;
  v.pass = moves > 0 && worst_gain_error <= 1e-9 && trace_ok && cliques && q_two == 0.5;
  v.detail = "(a) " + std::to_string(moves) + " moves on 20 graphs, max|dQ error|=" +
             fmt("%.2e", worst_gain_error) + " (b) trace " + (trace_ok ? "non-decreasing" : "DECREASED") +
             " (c) bridge graph " + (cliques ? "split into the two cliques" : "NOT split into cliques") +
             " (d) Q(two cliques)=" + fmt("%.17g", q_two);
  return v;
}

struct QualityMeans {
  double purity = 0.0;
  double nmi = 0.0;
  std::size_t min_clusters = SIZE_MAX;
  std::size_t max_clusters = 0;
};

QualityMeans sweep_quality(ClusterMode mode, const MixtureSpec& base, int seeds) {
  QualityMeans q;
  for (int s = 0; s < seeds; ++s) {
    auto spec = base;
    spec.seed = static_cast<std::uint64_t>(s);
    const auto data = generate(spec);
    PipelineConfig config;
    config.mode = mode;
    config.kmeans_k = spec.n_clusters;
    const auto out = cluster_embeddings(data.embeddings, config, static_cast<std::uint64_t>(s));
    const auto r = evaluate(out.partition, data.labels);
    q.purity += r.purity / seeds;
    q.nmi += r.nmi / seeds;
    q.min_clusters = std::min(q.min_clusters, r.n_clusters_pred);
    q.max_clusters = std::max(q.max_clusters, r.n_clusters_pred);
  }
  return q;
}

// Criterion 4: Louvain matches k-means quality without knowing k.
Verdict quality_pattern() {
  const auto start = Clock::now();
  MixtureSpec spec;
  spec.n_clusters = 5;
  spec.n_items = 10'000;
  spec.dim = 128;
  spec.separation = 10.0;
  const auto km = sweep_quality(ClusterMode::kmeans, spec, 5);
  const auto lv = sweep_quality(ClusterMode::louvain, spec, 5);
  const double elapsed = seconds_since(start);
  Verdict v;
  v.pass = km.purity >= 0.99 && lv.min_clusters >= 5 && lv.max_clusters <= 25 && lv.purity >= 0.95 &&
           std::abs(lv.nmi - km.nmi) <= 0.15 && elapsed < 120.0;
  v.detail = "kmeans purity=" + fmt("%.4f", km.purity) + " nmi=" + fmt("%.4f", km.nmi) +
             "; louvain clusters=[" + std::to_string(lv.min_clusters) + "," + std::to_string(lv.max_clusters) +
             "] purity=" + fmt("%.4f", lv.purity) + " nmi=" + fmt("%.4f", lv.nmi) +
             " |dnmi|=" + fmt("%.4f", std::abs(lv.nmi - km.nmi)) + " time=" + fmt("%.1fs", elapsed) +
             " (limit 120s)";
  return v;
}

// Criterion 5: quality rises with separation for both branches.
Verdict separation_sweep() {
  const auto start = Clock::now();
  MixtureSpec spec;
  spec.n_clusters = 5;
  spec.n_items = 2000;
  spec.dim = 128;
  bool monotone = true;
  std::ostringstream detail;
  for (auto mode : {ClusterMode::kmeans, ClusterMode::louvain}) {
    detail << mode_name(mode) << " (sep: purity/nmi)";
    QualityMeans prev{-1.0, -1.0};
    for (double sep : {1.0, 2.0, 4.0, 8.0}) {
      spec.separation = sep;
      const auto q = sweep_quality(mode, spec, 5);
      monotone = monotone && q.purity >= prev.purity && q.nmi >= prev.nmi;
      prev = q;
      detail << ' ' << sep << ": " << fmt("%.3f", q.purity) << '/' << fmt("%.3f", q.nmi);
    }
    detail << "; ";
  }
  const double elapsed = seconds_since(start);
  Verdict v;
  v.pass = monotone && elapsed < 300.0;
  detail << (monotone ? "non-decreasing" : "NOT monotone") << " time=" << fmt("%.1fs", elapsed)
         << " (limit 300s)";
  v.detail = detail.str();
  return v;
}

// Criterion 6: bigram counts on a corpus whose counts are known by construction.
Verdict summarization_conservation() {
  const std::size_t n_clusters = 4;
  const std::size_t per_cluster = 14;
  // Planted count for rank j; ranks 2 and 3 tie and must sort lexicographically.
  const auto count_for = [](std::size_t j) { return j == 3 ? std::size_t{30 - 2 * 2} : 30 - 2 * j; };
  std::vector<std::vector<TermCount>> expected(n_clusters);
  std::vector<std::pair<std::string, std::uint32_t>> texts;
  const char* fillers[] = {"the", "of", "and", "a"};
  for (std::size_t c = 0; c < n_clusters; ++c) {
    for (std::size_t j = 0; j < per_cluster; ++j) {
      const std::string first = "k" + std::to_string(c) + "w" + static_cast<char>('a' + j);
      const std::string second = "k" + std::to_string(c) + "v" + static_cast<char>('z' - j);
      const std::string bigram = first + " " + second;
      for (std::size_t r = 0; r < count_for(j); ++r) {
        // Stopwords between and around the pair vanish before pairing.
        texts.emplace_back(std::string(fillers[r % 4]) + " " + first + " " + fillers[(r + 1) % 4] + " " +
                               second + " " + fillers[(r + 2) % 4],
                           static_cast<std::uint32_t>(c));
      }
      expected[c].emplace_back(bigram, count_for(j));
    }
    // A bigram shared by every cluster, with a count below the top 10.
    for (std::size_t r = 0; r < c + 1; ++r) {
      texts.emplace_back("common phrase", static_cast<std::uint32_t>(c));
    }
    expected[c].emplace_back("common phrase", c + 1);
  }
  std::shuffle(texts.begin(), texts.end(), std::mt19937_64(6));
  TextCorpus corpus;
  std::vector<std::uint32_t> assignment;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    corpus.items.push_back({static_cast<std::int64_t>(i), texts[i].first});
    assignment.push_back(texts[i].second);
  }
  const Partition partition(assignment, static_cast<std::uint32_t>(n_clusters));

  bool top_ok = true;
  const auto top = cluster_bigrams(corpus, partition, default_stopwords(), 10);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    auto want = expected[c];
    std::sort(want.begin(), want.end(), [](const TermCount& a, const TermCount& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    want.resize(10);
    top_ok = top_ok && top[c] == want;
  }

  std::map<std::string, std::size_t> global;
  const Partition whole(std::vector<std::uint32_t>(corpus.size(), 0), 1);
  const auto whole_counts = cluster_bigrams(corpus, whole, default_stopwords(), SIZE_MAX);
  for (const auto& [t, n] : whole_counts[0]) {
    global[t] = n;
  }
  std::map<std::string, std::size_t> summed;
  for (const auto& list : cluster_bigrams(corpus, partition, default_stopwords(), SIZE_MAX)) {
    for (const auto& [t, n] : list) {
      summed[t] += n;
    }
  }
  std::map<std::string, std::size_t> planted;
  for (const auto& list : expected) {
    for (const auto& [t, n] : list) {
      planted[t] += n;
    }
  }
  const bool conserved = summed == global && global == planted;
  Verdict v;
  v.pass = top_ok && conserved;
  v.detail = std::to_string(corpus.size()) + " texts, " + std::to_string(global.size()) + " bigrams: top-10 lists " +
             (top_ok ? "exact" : "WRONG") + ", per-cluster sums " + (conserved ? "equal" : "DIFFER FROM") +
             " global counts";
  return v;
}

// Criterion 7: k-NN thread scaling and end-to-end time at n = 1e5, d = 128.
Verdict scaling() {
  MixtureSpec spec;
  spec.n_clusters = 5;
  spec.n_items = 100'000;
  spec.dim = 128;
  spec.separation = 10.0;
  spec.seed = 7;
  const auto data = generate(spec);

  double t1 = 0.0;
  double t8 = 0.0;
  {
    parallel::ThreadScope one(1);
    const auto start = Clock::now();
    (void)knn_search(data.embeddings, kDefaultKnnK);
    t1 = seconds_since(start);
  }
  {
    parallel::ThreadScope eight(8);
    const auto start = Clock::now();
    (void)knn_search(data.embeddings, kDefaultKnnK);
    t8 = seconds_since(start);
  }
  const double speedup = t1 / t8;

  testing_support::TempDir dir;
  save_embeddings(data.embeddings, dir / "emb.embv");
  save_corpus(data.corpus, &data.labels, dir / "corpus.jsonl");
  PipelineConfig config;
  config.embeddings = dir / "emb.embv";
  config.corpus = dir / "corpus.jsonl";
  config.output_dir = dir / "out";
  config.mode = ClusterMode::louvain;
  const auto start = Clock::now();
  const auto manifest = run_pipeline(config);
  const double pipeline_s = seconds_since(start);

  Verdict v;
  v.pass = speedup >= 3.0 && pipeline_s < 600.0;
  v.detail = "knn 1 thread " + fmt("%.1fs", t1) + ", 8 threads " + fmt("%.1fs", t8) + ", speedup " +
             fmt("%.2fx", speedup) + " (need >=3x; hardware threads on this host: " +
             std::to_string(parallel::hardware_threads()) + "); louvain pipeline " + fmt("%.1fs", pipeline_s) + " (limit 600s), " +
             std::to_string(manifest.n_clusters) + " clusters, purity " +
             fmt("%.4f", manifest.quality ? manifest.quality->purity : 0.0);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Criterion 8: byte-identical partition dumps across two runs.
Verdict determinism() {
  MixtureSpec spec;
  spec.n_clusters = 6;
  spec.n_items = 5000;
  spec.dim = 64;
  spec.separation = 6.0;
  spec.seed = 8;
  const auto data = generate(spec);
  testing_support::TempDir dir;
  save_embeddings(data.embeddings, dir / "emb.embv");
  save_corpus(data.corpus, &data.labels, dir / "corpus.jsonl");
  bool same = true;
  std::string detail;
  for (auto mode : {ClusterMode::kmeans, ClusterMode::louvain}) {
    PipelineConfig config;
    config.embeddings = dir / "emb.embv";
    config.corpus = dir / "corpus.jsonl";
    config.mode = mode;
    config.kmeans_k = 6;
    config.seed = 1234;
    std::string dumps[2];
    for (int run = 0; run < 2; ++run) {
      config.output_dir = dir / (mode_name(mode) + std::to_string(run));
      dumps[run] = slurp(run_pipeline(config).partition_path);
    }
    const bool eq = !dumps[0].empty() && dumps[0] == dumps[1];
    same = same && eq;
    detail += mode_name(mode) + (eq ? " identical" : " DIFFERENT") + " (" + std::to_string(dumps[0].size()) +
              " bytes); ";
  }
  return {same, detail + "5000 x 64, seed 1234"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "metric oracle equivalence", metric_oracles},
      {2, "exact k-NN correctness", knn_exactness},
      {3, "Louvain correctness", louvain_correctness},
      {4, "Louvain vs k-means quality pattern", quality_pattern},
      {5, "quality vs separation shape", separation_sweep},
      {6, "summarization conservation", summarization_conservation},
      {7, "k-NN thread scaling and end-to-end time", scaling},
      {8, "determinism", determinism},
  };
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) {
      continue;
    }
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s criterion %d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
