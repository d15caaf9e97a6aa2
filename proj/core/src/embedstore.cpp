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

#include "embclust/embedstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "embclust/error.hpp"
#include "embclust/random.hpp"

namespace embclust {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return __builtin_bswap64(v);
  }
  return v;
}

void swap_floats_if_big_endian(std::span<float> values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : values) {
      f = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(f)));
    }
  }
}

constexpr std::size_t kHeaderBytes = 24;

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t n_items, std::size_t dim, std::vector<float> values)
    : n_items_(n_items), dim_(dim), values_(std::move(values)) {
  if (n_items_ == 0 || dim_ == 0) {
    throw DataError("embedding matrix must have at least one row and one column");
  }
  if (values_.size() / dim_ != n_items_ || values_.size() % dim_ != 0) {
    throw DataError("embedding matrix has " + std::to_string(values_.size()) +
                    " values, expected " + std::to_string(n_items_) + " x " +
                    std::to_string(dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite embedding value at row " + std::to_string(i / dim_));
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<float> out;
  out.reserve(rows.size() * dim_);
  for (std::size_t r : rows) {
    const auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return EmbeddingMatrix(rows.size(), dim_, std::move(out));
}

LabelSet::LabelSet(std::vector<std::uint32_t> labels, std::uint32_t n_classes,
                   std::vector<std::string> class_names)
    : labels_(std::move(labels)), n_classes_(n_classes), class_names_(std::move(class_names)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= n_classes_) {
      throw DataError("label " + std::to_string(labels_[i]) + " at item " + std::to_string(i) +
                      " is not below n_classes = " + std::to_string(n_classes_));
    }
  }
  if (!class_names_.empty() && class_names_.size() != n_classes_) {
    throw DataError("class_names has " + std::to_string(class_names_.size()) +
                    " entries, expected " + std::to_string(n_classes_));
  }
}

LabelSet LabelSet::from_names(std::span<const std::string> names) {
  std::map<std::string, std::uint32_t> index;
  std::vector<std::string> class_names;
  std::vector<std::uint32_t> labels;
  labels.reserve(names.size());
  for (const auto& name : names) {
    auto [it, inserted] = index.emplace(name, static_cast<std::uint32_t>(class_names.size()));
    if (inserted) {
      class_names.push_back(name);
    }
    labels.push_back(it->second);
  }
  const auto n = static_cast<std::uint32_t>(class_names.size());
  return LabelSet(std::move(labels), n, std::move(class_names));
}

std::vector<std::size_t> LabelSet::class_sizes() const {
  std::vector<std::size_t> sizes(n_classes_, 0);
  for (auto l : labels_) {
    ++sizes[l];
  }
  return sizes;
}

LabelSet LabelSet::select(std::span<const std::size_t> rows) const {
  std::vector<std::uint32_t> out;
  out.reserve(rows.size());
  for (auto r : rows) {
    out.push_back(labels_.at(r));
  }
  return LabelSet(std::move(out), n_classes_, class_names_);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open embedding file " + path.string());
  }
  char header[kHeaderBytes];
  in.read(header, kHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
    throw DataError("malformed header in " + path.string() + ": file shorter than 24 bytes");
  }
  if (std::memcmp(header, kEmbeddingMagic, sizeof kEmbeddingMagic) != 0) {
    throw DataError("malformed header in " + path.string() + ": bad magic");
  }
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::memcpy(&n, header + 8, 8);
  std::memcpy(&d, header + 16, 8);
  n = to_little(n);
  d = to_little(d);
  if (n == 0 || d == 0) {
    throw DataError("malformed header in " + path.string() + ": zero n_items or dim");
  }
  if (n > (std::uint64_t{1} << 40) / d) {
    throw DataError("malformed header in " + path.string() + ": implausible shape");
  }

  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t expected = n * d * sizeof(float);
  const std::uint64_t payload = file_size - kHeaderBytes;
  if (payload != expected) {
    throw DataError("size mismatch in " + path.string() + ": header declares " +
                    std::to_string(n * d) + " floats, payload holds " +
                    std::to_string(payload / sizeof(float)) +
                    (payload % sizeof(float) ? " and a partial value" : ""));
  }
  in.seekg(kHeaderBytes);
  std::vector<float> values(n * d);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected));
  if (!in) {
    throw IoError("read failure in " + path.string());
  }
  swap_floats_if_big_endian(values);
  return EmbeddingMatrix(n, d, std::move(values));
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  const std::uint64_t n = to_little(matrix.n_items());
  const std::uint64_t d = to_little(matrix.dim());
  out.write(kEmbeddingMagic, sizeof kEmbeddingMagic);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&d), 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(matrix.values().data()),
              static_cast<std::streamsize>(matrix.values().size() * sizeof(float)));
  } else {
    std::vector<float> copy(matrix.values().begin(), matrix.values().end());
    swap_floats_if_big_endian(copy);
    out.write(reinterpret_cast<const char*>(copy.data()),
              static_cast<std::streamsize>(copy.size() * sizeof(float)));
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

CorpusFile load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open corpus file " + path.string());
  }
  CorpusFile result;
  std::vector<std::string> label_names;
  std::size_t labelled = 0;
  std::unordered_set<std::int64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("malformed record at " + where() + ": " + e.what());
    }
    if (!record.is_object()) {
      throw DataError("malformed record at " + where() + ": not a JSON object");
    }
    const auto id = record.find("id");
    if (id == record.end() || !id->is_number_integer()) {
      throw DataError("malformed record at " + where() + ": missing integer field 'id'");
    }
    const auto text = record.find("text");
    if (text == record.end() || !text->is_string()) {
      throw DataError("malformed record at " + where() + ": missing string field 'text'");
    }
    const auto id_value = id->get<std::int64_t>();
    if (!seen.insert(id_value).second) {
      throw DataError("duplicate id " + std::to_string(id_value) + " at " + where());
    }
    result.corpus.items.push_back({id_value, text->get<std::string>()});

    const auto label = record.find("label");
    if (label != record.end() && !label->is_null()) {
      if (!label->is_string()) {
        throw DataError("malformed record at " + where() + ": 'label' must be a string");
      }
      label_names.push_back(label->get<std::string>());
      ++labelled;
    } else {
      label_names.emplace_back();
    }
  }
  if (in.bad()) {
    throw IoError("read failure in " + path.string());
  }
  if (labelled > 0 && labelled == result.corpus.size()) {
    result.labels = LabelSet::from_names(label_names);
  }
  return result;
}

void save_corpus(const TextCorpus& corpus, const LabelSet* labels,
                 const std::filesystem::path& path) {
  if (labels != nullptr && labels->size() != corpus.size()) {
    throw DataError("label count " + std::to_string(labels->size()) + " does not match corpus size " +
                    std::to_string(corpus.size()));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    nlohmann::json record;
    record["id"] = corpus.items[i].id;
    record["text"] = corpus.items[i].text;
    if (labels != nullptr) {
      const auto l = (*labels)[i];
      record["label"] = labels->class_names().empty() ? std::to_string(l) : labels->class_names()[l];
    }
    out << record.dump() << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size(), 0);
  if (weights.empty() || sum <= 0.0) {
    return out;
  }
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = weights[i] / sum * static_cast<double>(total);
    out[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - std::floor(quota);
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total && i < order.size(); ++i, ++assigned) {
    ++out[order[i]];
  }
  return out;
}

std::vector<std::size_t> stratified_sample(const LabelSet& labels, double fraction,
                                           std::size_t min_per_class, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("stratified_sample: fraction must lie in (0, 1)");
  }
  const auto sizes = labels.class_sizes();
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] == 0) {
      throw DataError("stratified_sample: class " + std::to_string(c) + " has no members");
    }
  }
  std::vector<double> weights(sizes.begin(), sizes.end());
  const auto total = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(labels.size())));
  auto quotas = apportion(weights, total);
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    quotas[c] = std::max(quotas[c], std::min(min_per_class, sizes[c]));
  }

  std::vector<std::vector<std::size_t>> members(sizes.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[labels[i]].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(total);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    // Partial Fisher-Yates: the first quota entries become the sample.
    for (std::size_t i = 0; i < quotas[c]; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_below(rng, m.size() - i));
      std::swap(m[i], m[j]);
    }
    out.insert(out.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(quotas[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace embclust
