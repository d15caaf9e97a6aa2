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

#include "embclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "embclust/error.hpp"

namespace embclust {
namespace {

double entropy(const std::vector<std::size_t>& counts, double total) {
  double h = 0.0;
  for (auto c : counts) {
    if (c > 0) {
      const double p = static_cast<double>(c) / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

std::size_t non_empty(const std::vector<std::size_t>& counts) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(),
                                                [](std::size_t c) { return c > 0; }));
}

}  // namespace

ContingencyTable::ContingencyTable(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      counts_(n_rows * n_cols, 0),
      row_sums_(n_rows, 0),
      col_sums_(n_cols, 0) {}

void ContingencyTable::add(std::size_t row, std::size_t col, std::size_t count) {
  counts_[row * n_cols_ + col] += count;
  row_sums_[row] += count;
  col_sums_[col] += count;
  total_ += count;
}

ContingencyTable contingency(const Partition& pred, const LabelSet& truth) {
  if (pred.size() != truth.size()) {
    throw DataError("contingency: prediction covers " + std::to_string(pred.size()) +
                    " items, labels cover " + std::to_string(truth.size()));
  }
  ContingencyTable table(pred.n_clusters(), truth.n_classes());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    table.add(pred[i], truth[i]);
  }
  return table;
}

double purity(const ContingencyTable& table) {
  if (table.total() == 0) {
    return 0.0;
  }
  std::size_t hits = 0;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      best = std::max(best, table.at(r, c));
    }
    hits += best;
  }
  return static_cast<double>(hits) / static_cast<double>(table.total());
}

double purity(const Partition& pred, const LabelSet& truth) {
  return purity(contingency(pred, truth));
}

double nmi(const ContingencyTable& table) {
  if (table.total() == 0) {
    return 0.0;
  }
  const double n = static_cast<double>(table.total());
  const double h_pred = entropy(table.row_sums(), n);
  const double h_true = entropy(table.col_sums(), n);
  if (h_pred == 0.0 && h_true == 0.0) {
    return 1.0;
  }
  double mi = 0.0;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      const auto joint = table.at(r, c);
      if (joint == 0) {
        continue;
      }
      const double pj = static_cast<double>(joint) / n;
      const double pr = static_cast<double>(table.row_sums()[r]) / n;
      const double pc = static_cast<double>(table.col_sums()[c]) / n;
      mi += pj * std::log(pj / (pr * pc));
    }
  }
  const double denom = 0.5 * (h_pred + h_true);
  if (denom <= 0.0 || mi <= 0.0) {
    return 0.0;
  }
  return std::min(1.0, mi / denom);
}

double nmi(const Partition& pred, const LabelSet& truth) { return nmi(contingency(pred, truth)); }

QualityReport evaluate(const Partition& pred, const LabelSet& truth) {
  const auto table = contingency(pred, truth);
  QualityReport r;
  r.purity = purity(table);
  r.nmi = nmi(table);
  r.n_clusters_pred = non_empty(table.row_sums());
  r.n_classes_truth = non_empty(table.col_sums());
  return r;
}

std::string QualityReport::to_json() const {
  nlohmann::json j;
  j["purity"] = purity;
  j["nmi"] = nmi;
  j["n_clusters_pred"] = n_clusters_pred;
  j["n_classes_truth"] = n_classes_truth;
  return j.dump(2);
}

std::string QualityReport::csv_header() { return "n_clusters,n_classes,purity,nmi"; }

std::string QualityReport::to_csv_row() const {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << n_clusters_pred << ',' << n_classes_truth << ',' << purity << ',' << nmi;
  return out.str();
}

}  // namespace embclust
