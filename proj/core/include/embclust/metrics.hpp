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
#include "embclust/partition.hpp"

namespace embclust {

/// Joint counts |cluster_r ∩ class_c| with marginals.
class ContingencyTable {
 public:
  ContingencyTable(std::size_t n_rows, std::size_t n_cols);

  std::size_t n_rows() const noexcept { return n_rows_; }  // predicted clusters
  std::size_t n_cols() const noexcept { return n_cols_; }  // true classes
  std::size_t total() const noexcept { return total_; }

  std::size_t at(std::size_t row, std::size_t col) const noexcept {
    return counts_[row * n_cols_ + col];
  }
  void add(std::size_t row, std::size_t col, std::size_t count = 1);

  const std::vector<std::size_t>& row_sums() const noexcept { return row_sums_; }
  const std::vector<std::size_t>& col_sums() const noexcept { return col_sums_; }

 private:
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> row_sums_;
  std::vector<std::size_t> col_sums_;
};

/// Throws DataError if the sizes differ.
ContingencyTable contingency(const Partition& pred, const LabelSet& truth);

/// (1/N) sum_k max_j |w_k ∩ c_j|.
double purity(const Partition& pred, const LabelSet& truth);
double purity(const ContingencyTable& table);

/// I(pred, truth) / ((H(pred) + H(truth)) / 2), natural logs.
/// Both entropies zero gives 1; otherwise a zero denominator or zero mutual
/// information gives 0.
double nmi(const Partition& pred, const LabelSet& truth);
double nmi(const ContingencyTable& table);

struct QualityReport {
  double purity = 0.0;
  double nmi = 0.0;
  std::size_t n_clusters_pred = 0;  // non-empty predicted clusters
  std::size_t n_classes_truth = 0;  // non-empty true classes

  std::string to_json() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

QualityReport evaluate(const Partition& pred, const LabelSet& truth);

}  // namespace embclust
