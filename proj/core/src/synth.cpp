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

#include "embclust/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "embclust/error.hpp"
#include "embclust/random.hpp"

namespace embclust {
namespace {

constexpr std::size_t kTopicWords = 16;
constexpr std::size_t kSignatureBigrams = 3;
constexpr std::size_t kCommonWords = 24;

constexpr const char* kSyllables[] = {"ka",  "lo",  "mi",  "ren", "tus", "vo",  "zan", "pel",
                                      "dri", "quo", "sem", "bal", "tor", "nix", "ful", "gar",
                                      "shi", "mon", "ept", "ral", "ub",  "cor", "yen", "fi"};
constexpr const char* kFillers[] = {"the", "of", "and", "in", "a", "to", "with", "for"};

void validate(const MixtureSpec& spec) {
  if (spec.n_clusters < 1 || spec.n_items < 1 || spec.dim < 1) {
    throw ConfigError("synth: n_clusters, n_items and dim must be >= 1");
  }
  if (spec.n_clusters > spec.n_items) {
    throw ConfigError("synth: n_clusters = " + std::to_string(spec.n_clusters) +
                      " exceeds n_items = " + std::to_string(spec.n_items));
  }
  if (!(spec.separation > 0.0) || !std::isfinite(spec.separation)) {
    throw ConfigError("synth: separation must be positive and finite");
  }
  if (!spec.proportions.empty()) {
    if (spec.proportions.size() != spec.n_clusters) {
      throw ConfigError("synth: proportions must have one entry per cluster");
    }
    double sum = 0.0;
    for (double p : spec.proportions) {
      if (!(p >= 0.0)) {
        throw ConfigError("synth: proportions must be non-negative");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ConfigError("synth: proportions must sum to 1");
    }
  }
}

std::vector<double> make_centers(const MixtureSpec& spec, Rng& rng) {
  const std::size_t k = spec.n_clusters;
  const std::size_t dim = spec.dim;
  std::vector<double> centers(k * dim, 0.0);
  if (k == 1) {
    return centers;
  }
  if (k <= dim) {
    // Gram-Schmidt on Gaussian vectors gives a random orthonormal frame;
    // scaling by s / sqrt(2) puts every pair exactly s apart.
    const double scale = spec.separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < k; ++c) {
      double* v = centers.data() + c * dim;
      double norm = 0.0;
      do {
        for (std::size_t d = 0; d < dim; ++d) {
          v[d] = standard_normal(rng);
        }
        for (std::size_t prev = 0; prev < c; ++prev) {
          const double* u = centers.data() + prev * dim;
          double dot = 0.0;
          for (std::size_t d = 0; d < dim; ++d) {
            dot += v[d] * u[d];
          }
          for (std::size_t d = 0; d < dim; ++d) {
            v[d] -= dot * u[d];
          }
        }
        norm = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          norm += v[d] * v[d];
        }
        norm = std::sqrt(norm);
      } while (norm < 1e-8);
      for (std::size_t d = 0; d < dim; ++d) {
        v[d] /= norm;
      }
    }
    for (auto& x : centers) {
      x *= scale;
    }
  } else {
    const double sd = spec.separation / std::sqrt(2.0 * static_cast<double>(dim));
    for (auto& x : centers) {
      x = sd * standard_normal(rng);
    }
  }
  return centers;
}

std::vector<std::uint32_t> draw_labels(const MixtureSpec& spec, Rng& rng) {
  std::vector<double> weights =
      spec.proportions.empty() ? std::vector<double>(spec.n_clusters, 1.0) : spec.proportions;
  std::vector<std::uint32_t> labels;
  labels.reserve(spec.n_items);
  if (spec.size_mode == SizeMode::quota) {
    const auto sizes = apportion(weights, spec.n_items);
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      labels.insert(labels.end(), sizes[c], static_cast<std::uint32_t>(c));
    }
    shuffle(std::span<std::uint32_t>(labels), rng);
  } else {
    std::vector<double> cumulative(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    const double total = cumulative.back();
    for (std::size_t i = 0; i < spec.n_items; ++i) {
      const double u = uniform01(rng) * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      labels.push_back(static_cast<std::uint32_t>(
          std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                   static_cast<std::ptrdiff_t>(weights.size()) - 1)));
    }
  }
  return labels;
}

struct Vocabulary {
  std::vector<std::vector<std::string>> topic;  // per cluster
  std::vector<std::string> common;
};

Vocabulary make_vocabulary(std::size_t n_clusters, Rng& rng) {
  constexpr std::size_t n_syl = std::size(kSyllables);
  std::set<std::string> used;
  auto fresh_word = [&] {
    for (;;) {
      std::string w;
      const std::size_t parts = 2 + uniform_below(rng, 2);
      for (std::size_t p = 0; p < parts; ++p) {
        w += kSyllables[uniform_below(rng, n_syl)];
      }
      if (used.insert(w).second) {
        return w;
      }
    }
  };
  Vocabulary v;
  v.common.reserve(kCommonWords);
  for (std::size_t i = 0; i < kCommonWords; ++i) {
    v.common.push_back(fresh_word());
  }
  v.topic.resize(n_clusters);
  for (auto& words : v.topic) {
    for (std::size_t i = 0; i < kTopicWords; ++i) {
      words.push_back(fresh_word());
    }
  }
  return v;
}

std::string make_text(const Vocabulary& vocab, std::size_t cluster, Rng& rng) {
  const auto& topic = vocab.topic[cluster];
  const std::size_t sig = uniform_below(rng, kSignatureBigrams);
  std::string text = topic[2 * sig] + ' ' + topic[2 * sig + 1];
  const std::size_t extra = 3 + uniform_below(rng, 4);
  for (std::size_t i = 0; i < extra; ++i) {
    if (uniform01(rng) < 0.4) {
      text += ' ';
      text += kFillers[uniform_below(rng, std::size(kFillers))];
    }
    text += ' ';
    if (uniform01(rng) < 0.65) {
      text += topic[2 * kSignatureBigrams + uniform_below(rng, kTopicWords - 2 * kSignatureBigrams)];
    } else {
      text += vocab.common[uniform_below(rng, vocab.common.size())];
    }
  }
  text += '.';
  return text;
}

}  // namespace

SynthData generate(const MixtureSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const auto centers = make_centers(spec, rng);
  auto labels = draw_labels(spec, rng);

  std::vector<float> values(spec.n_items * spec.dim);
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    const double* center = centers.data() + labels[i] * spec.dim;
    float* row = values.data() + i * spec.dim;
    for (std::size_t d = 0; d < spec.dim; ++d) {
      row[d] = static_cast<float>(center[d] + standard_normal(rng));
    }
  }

  const auto vocab = make_vocabulary(spec.n_clusters, rng);
  TextCorpus corpus;
  corpus.items.reserve(spec.n_items);
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    corpus.items.push_back({static_cast<std::int64_t>(i), make_text(vocab, labels[i], rng)});
  }
  std::vector<std::vector<std::string>> planted(spec.n_clusters);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < spec.n_clusters; ++c) {
    for (std::size_t s = 0; s < kSignatureBigrams; ++s) {
      planted[c].push_back(vocab.topic[c][2 * s] + ' ' + vocab.topic[c][2 * s + 1]);
    }
    names.push_back("cluster_" + std::to_string(c));
  }

  return SynthData{
      EmbeddingMatrix(spec.n_items, spec.dim, std::move(values)),
      LabelSet(std::move(labels), static_cast<std::uint32_t>(spec.n_clusters), std::move(names)),
      std::move(corpus),
      std::move(planted),
  };
}

PlantedGraph planted_graph(const MixtureSpec& spec, std::size_t k, const Weighting& weighting) {
  auto data = generate(spec);
  const auto neighbors = knn_search(data.embeddings, k);
  return PlantedGraph{build_graph(neighbors, weighting), std::move(data.labels)};
}

double inter_class_edge_fraction(const KnnGraph& graph, const LabelSet& labels) {
  if (labels.size() != graph.n_nodes()) {
    throw DataError("inter_class_edge_fraction: labels do not cover the graph");
  }
  if (graph.n_edges() == 0) {
    return 0.0;
  }
  std::size_t cross = 0;
  for (const auto& e : graph.edges()) {
    cross += labels[e.u] != labels[e.v] ? 1 : 0;
  }
  return static_cast<double>(cross) / static_cast<double>(graph.n_edges());
}

}  // namespace embclust
