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
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "embclust/embedstore.hpp"
#include "embclust/partition.hpp"

namespace embclust {

using StopWords = std::unordered_set<std::string>;
using TermCount = std::pair<std::string, std::size_t>;

/// Built-in English stopword list.
const StopWords& default_stopwords();
/// One word per line; blank lines and lines starting with '#' are skipped.
StopWords load_stopwords(const std::filesystem::path& path);

/// Lowercases ASCII letters, splits on every non-alphanumeric byte run and
/// drops stopwords. Numeric tokens are kept. Bytes >= 0x80 count as
/// alphanumeric so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text, const StopWords& stopwords);

/// Adjacent-token bigrams of one text after stopword removal, "first second".
std::vector<std::string> bigrams_of(const std::vector<std::string>& tokens);

/// Per-cluster top `top_n` bigrams, sorted by count descending then
/// lexicographically. Bigrams never cross text boundaries.
/// Throws DataError if the corpus and partition sizes differ.
std::vector<std::vector<TermCount>> cluster_bigrams(const TextCorpus& corpus,
                                                    const Partition& partition,
                                                    const StopWords& stopwords,
                                                    std::size_t top_n = 10);

/// Per-cluster unigram counts >= min_frequency, same ordering.
std::vector<std::vector<TermCount>> cluster_terms(const TextCorpus& corpus,
                                                  const Partition& partition,
                                                  const StopWords& stopwords,
                                                  std::size_t min_frequency);

/// Per cluster, the `per_cluster` member rows closest to the cluster mean,
/// ties to the lower row. Throws DataError on size mismatch.
std::vector<std::vector<std::size_t>> representatives(const EmbeddingMatrix& matrix,
                                                      const Partition& partition,
                                                      std::size_t per_cluster);

struct ClusterReport {
  std::uint32_t cluster_id = 0;
  std::size_t size = 0;
  std::vector<TermCount> top_terms;
  std::vector<TermCount> top_bigrams;
  /// Corpus ids when a corpus is attached, otherwise row indices.
  std::vector<std::int64_t> representative_ids;
};

struct SummaryParams {
  std::size_t top_bigrams = 10;
  std::size_t min_term_frequency = 5;
  /// Cap on reported terms per cluster after thresholding.
  std::size_t max_terms = 50;
  std::size_t representatives = 5;
};

/// Full per-cluster reports. `corpus` may be null, in which case the term
/// and bigram lists are empty.
std::vector<ClusterReport> summarize_clusters(const EmbeddingMatrix& matrix,
                                              const TextCorpus* corpus,
                                              const Partition& partition,
                                              const StopWords& stopwords,
                                              const SummaryParams& params);

/// JSON document {"metadata": {...}, "clusters": [...]}.
std::string reports_to_json(const std::vector<ClusterReport>& reports,
                            const SummaryParams& params);
/// Flattened rows: cluster_id,size,kind,rank,item,count.
std::string reports_to_csv(const std::vector<ClusterReport>& reports);

}  // namespace embclust
