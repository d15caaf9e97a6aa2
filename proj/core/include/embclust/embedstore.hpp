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

// Embedding matrices, text corpora and label sets, plus their file formats.
//
// Embedding file layout (little-endian):
//   bytes 0..7   magic "EMBV0001"
//   bytes 8..15  u64 n_items
//   bytes 16..23 u64 dim
//   then n_items * dim IEEE-754 float32 values, row-major.
//
// Corpus file: UTF-8 JSON lines, {"id": <int>, "text": <string>, "label": <string>?}.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embclust {

inline constexpr char kEmbeddingMagic[8] = {'E', 'M', 'B', 'V', '0', '0', '0', '1'};

/// Dense row-major N x D float matrix. Immutable after construction.
class EmbeddingMatrix {
 public:
  /// Throws DataError if the shape is empty, the value count does not match,
  /// or any entry is NaN/Inf.
  EmbeddingMatrix(std::size_t n_items, std::size_t dim, std::vector<float> values);

  std::size_t n_items() const noexcept { return n_items_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const noexcept { return values_; }

  /// Rows selected by index, in the given order.
  EmbeddingMatrix select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t n_items_;
  std::size_t dim_;
  std::vector<float> values_;
};

struct TextItem {
  std::int64_t id = 0;
  std::string text;

  friend bool operator==(const TextItem&, const TextItem&) = default;
};

/// Raw texts, aligned to embedding rows by position.
struct TextCorpus {
  std::vector<TextItem> items;

  std::size_t size() const noexcept { return items.size(); }
};

/// Ground-truth class per item.
class LabelSet {
 public:
  LabelSet(std::vector<std::uint32_t> labels, std::uint32_t n_classes,
           std::vector<std::string> class_names = {});

  /// Dense labels numbered by first appearance of each name.
  static LabelSet from_names(std::span<const std::string> names);

  std::size_t size() const noexcept { return labels_.size(); }
  std::uint32_t n_classes() const noexcept { return n_classes_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::uint32_t operator[](std::size_t i) const noexcept { return labels_[i]; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

  /// Number of items in each class.
  std::vector<std::size_t> class_sizes() const;

  LabelSet select(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::uint32_t> labels_;
  std::uint32_t n_classes_;
  std::vector<std::string> class_names_;
};

struct CorpusFile {
  TextCorpus corpus;
  /// Present only when every record carries a label.
  std::optional<LabelSet> labels;
};

EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);

CorpusFile load_corpus(const std::filesystem::path& path);

/// Writes a corpus file. When `labels` is given, its class names (or the
/// decimal class index if unnamed) become each record's "label" field.
void save_corpus(const TextCorpus& corpus, const LabelSet* labels,
                 const std::filesystem::path& path);

/// Stratified subset of row indices, sorted ascending.
///
/// Per-class quotas are fraction * class_size, floored, with the remaining
/// total distributed to the classes with the largest fractional parts (ties
/// to the lower class index). Each quota is then raised to at least
/// min(min_per_class, class_size). Members are drawn uniformly per class.
std::vector<std::size_t> stratified_sample(const LabelSet& labels, double fraction,
                                           std::size_t min_per_class, std::uint64_t seed);

/// Largest-remainder apportionment of `total` across `weights`.
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total);

}  // namespace embclust
