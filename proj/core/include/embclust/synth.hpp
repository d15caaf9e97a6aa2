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
#include <string>
#include <vector>

#include "embclust/embedstore.hpp"
#include "embclust/knn.hpp"

namespace embclust {

enum class SizeMode {
  quota,        // largest-remainder apportionment, exact
  multinomial,  // independent draws per item
};

/// Isotropic Gaussian mixture with unit within-cluster sigma.
struct MixtureSpec {
  std::size_t n_clusters = 5;
  std::size_t n_items = 1000;
  std::size_t dim = 32;
  /// Pairwise center distance in units of sigma.
  double separation = 10.0;
  /// Cluster proportions; empty means balanced.
  std::vector<double> proportions;
  SizeMode size_mode = SizeMode::quota;
  std::uint64_t seed = 0;
};

struct SynthData {
  EmbeddingMatrix embeddings;
  LabelSet labels;
  TextCorpus corpus;
  /// Signature bigrams planted in each cluster's texts.
  std::vector<std::vector<std::string>> planted_bigrams;
};

/// Samples a mixture. When n_clusters <= dim the centers sit on a random
/// orthonormal frame scaled so every pair is exactly `separation` apart;
/// otherwise centers are Gaussian with that expected pairwise distance.
/// Item order is shuffled. Texts are drawn from per-cluster vocabularies.
/// Throws ConfigError on an invalid spec (n_clusters > n_items, ...).
SynthData generate(const MixtureSpec& spec);

struct PlantedGraph {
  KnnGraph graph;
  LabelSet labels;
};

/// generate + knn_search + build_graph.
PlantedGraph planted_graph(const MixtureSpec& spec, std::size_t k,
                           const Weighting& weighting = {});

/// Fraction of edges whose endpoints carry different labels.
double inter_class_edge_fraction(const KnnGraph& graph, const LabelSet& labels);

}  // namespace embclust
