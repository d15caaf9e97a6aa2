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

#include "embclust/summarize.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "embclust/error.hpp"
#include "embclust/parallel.hpp"

namespace embclust {
namespace {

bool is_word_byte(unsigned char ch) {
  return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
         ch >= 0x80;
}

void check_alignment(std::size_t items, const Partition& partition, const char* what) {
  if (items != partition.size()) {
    throw DataError(std::string(what) + ": " + std::to_string(items) +
                    " items do not align with a partition of " + std::to_string(partition.size()));
  }
}

std::vector<TermCount> rank(const std::unordered_map<std::string, std::size_t>& counts,
                            std::size_t min_count, std::size_t limit) {
  std::vector<TermCount> out;
  for (const auto& [term, count] : counts) {
    if (count >= min_count) {
      out.emplace_back(term, count);
    }
  }
  std::sort(out.begin(), out.end(), [](const TermCount& a, const TermCount& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (out.size() > limit) {
    out.resize(limit);
  }
  return out;
}

enum class Gram { unigram, bigram };

std::vector<std::vector<TermCount>> count_per_cluster(const TextCorpus& corpus,
                                                      const Partition& partition,
                                                      const StopWords& stopwords, Gram gram,
                                                      std::size_t min_count, std::size_t limit) {
  const auto members = partition.members();
  std::vector<std::vector<TermCount>> out(members.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel::num_threads())
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::unordered_map<std::string, std::size_t> counts;
    for (auto i : members[c]) {
      const auto tokens = tokenize(corpus.items[i].text, stopwords);
      if (gram == Gram::unigram) {
        for (const auto& t : tokens) {
          ++counts[t];
        }
      } else {
        for (auto& b : bigrams_of(tokens)) {
          ++counts[std::move(b)];
        }
      }
    }
    out[c] = rank(counts, min_count, limit);
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const StopWords& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (!stopwords.contains(current)) {
        tokens.push_back(std::move(current));
      }
      current.clear();
    }
  };
  for (const char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (is_word_byte(ch)) {
      current.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : raw);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> bigrams_of(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  if (tokens.size() < 2) {
    return out;
  }
  out.reserve(tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    out.push_back(tokens[i] + ' ' + tokens[i + 1]);
  }
  return out;
}

std::vector<std::vector<TermCount>> cluster_bigrams(const TextCorpus& corpus,
                                                    const Partition& partition,
                                                    const StopWords& stopwords,
                                                    std::size_t top_n) {
  check_alignment(corpus.size(), partition, "cluster_bigrams");
  return count_per_cluster(corpus, partition, stopwords, Gram::bigram, 1, top_n);
}

std::vector<std::vector<TermCount>> cluster_terms(const TextCorpus& corpus,
                                                  const Partition& partition,
                                                  const StopWords& stopwords,
                                                  std::size_t min_frequency) {
  check_alignment(corpus.size(), partition, "cluster_terms");
  return count_per_cluster(corpus, partition, stopwords, Gram::unigram,
                           std::max<std::size_t>(min_frequency, 1),
                           std::numeric_limits<std::size_t>::max());
}

std::vector<std::vector<std::size_t>> representatives(const EmbeddingMatrix& matrix,
                                                      const Partition& partition,
                                                      std::size_t per_cluster) {
  check_alignment(matrix.n_items(), partition, "representatives");
  const std::size_t dim = matrix.dim();
  const auto members = partition.members();
  std::vector<std::vector<std::size_t>> out(members.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel::num_threads())
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& m = members[c];
    if (m.empty()) {
      continue;
    }
    std::vector<double> mean(dim, 0.0);
    for (auto i : m) {
      const auto row = matrix.row(i);
      for (std::size_t d = 0; d < dim; ++d) {
        mean[d] += row[d];
      }
    }
    for (auto& v : mean) {
      v /= static_cast<double>(m.size());
    }
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(m.size());
    for (auto i : m) {
      const auto row = matrix.row(i);
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = row[d] - mean[d];
        s += diff * diff;
      }
      scored.emplace_back(s, i);
    }
    const std::size_t take = std::min(per_cluster, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end());
    out[c].reserve(take);
    for (std::size_t j = 0; j < take; ++j) {
      out[c].push_back(scored[j].second);
    }
  }
  return out;
}

std::vector<ClusterReport> summarize_clusters(const EmbeddingMatrix& matrix,
                                              const TextCorpus* corpus,
                                              const Partition& partition,
                                              const StopWords& stopwords,
                                              const SummaryParams& params) {
  if (corpus != nullptr) {
    check_alignment(corpus->size(), partition, "summarize");
  }
  const auto reps = representatives(matrix, partition, params.representatives);
  std::vector<std::vector<TermCount>> terms;
  std::vector<std::vector<TermCount>> bigrams;
  if (corpus != nullptr) {
    terms = cluster_terms(*corpus, partition, stopwords, params.min_term_frequency);
    bigrams = cluster_bigrams(*corpus, partition, stopwords, params.top_bigrams);
  }
  std::vector<ClusterReport> reports(partition.n_clusters());
  for (std::uint32_t c = 0; c < partition.n_clusters(); ++c) {
    auto& r = reports[c];
    r.cluster_id = c;
    r.size = partition.sizes()[c];
    if (corpus != nullptr) {
      r.top_terms = std::move(terms[c]);
      if (r.top_terms.size() > params.max_terms) {
        r.top_terms.resize(params.max_terms);
      }
      r.top_bigrams = std::move(bigrams[c]);
    }
    for (auto i : reps[c]) {
      r.representative_ids.push_back(corpus != nullptr ? corpus->items[i].id
                                                       : static_cast<std::int64_t>(i));
    }
  }
  return reports;
}

std::string reports_to_json(const std::vector<ClusterReport>& reports,
                            const SummaryParams& params) {
  nlohmann::json doc;
  doc["metadata"] = {
      {"bigram_rule", "adjacent tokens after stopword removal, within one text"},
      {"top_bigrams", params.top_bigrams},
      {"min_term_frequency", params.min_term_frequency},
      {"max_terms", params.max_terms},
      {"representatives", params.representatives},
  };
  auto& clusters = doc["clusters"] = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json c;
    c["cluster_id"] = r.cluster_id;
    c["size"] = r.size;
    c["top_terms"] = nlohmann::json::array();
    for (const auto& [t, n] : r.top_terms) {
      c["top_terms"].push_back({{"term", t}, {"count", n}});
    }
    c["top_bigrams"] = nlohmann::json::array();
    for (const auto& [t, n] : r.top_bigrams) {
      c["top_bigrams"].push_back({{"bigram", t}, {"count", n}});
    }
    c["representative_ids"] = r.representative_ids;
    clusters.push_back(std::move(c));
  }
  return doc.dump(2);
}

std::string reports_to_csv(const std::vector<ClusterReport>& reports) {
  std::ostringstream out;
  out << "cluster_id,size,kind,rank,item,count\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.top_terms.size(); ++i) {
      out << r.cluster_id << ',' << r.size << ",term," << i << ',' << r.top_terms[i].first << ','
          << r.top_terms[i].second << '\n';
    }
    for (std::size_t i = 0; i < r.top_bigrams.size(); ++i) {
      out << r.cluster_id << ',' << r.size << ",bigram," << i << ',' << r.top_bigrams[i].first
          << ',' << r.top_bigrams[i].second << '\n';
    }
    for (std::size_t i = 0; i < r.representative_ids.size(); ++i) {
      out << r.cluster_id << ',' << r.size << ",representative," << i << ','
          << r.representative_ids[i] << ",\n";
    }
  }
  return out.str();
}

}  // namespace embclust
