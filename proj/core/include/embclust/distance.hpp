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

// Blocked squared-L2 kernel shared by knn and kmeans.
//
// Distances use the expansion |x - y|^2 = |x|^2 + |y|^2 - 2 x.y, clamped at
// zero. Every dot product is accumulated over the dimensions in the same
// order by the same microkernel, so a given (x, y) pair yields the same float
// regardless of how the caller tiles the work.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace embclust::kernel {

inline constexpr std::size_t kPanelWidth = 16;
inline constexpr std::size_t kQueryGroup = 8;

/// Rows of a row-major matrix repacked into panels of kPanelWidth rows,
/// each stored dimension-major ([dim][kPanelWidth]). Padding rows are zero.
class PackedRows {
 public:
  PackedRows(std::span<const float> values, std::size_t n_rows, std::size_t dim);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_panels() const noexcept { return n_panels_; }
  const float* panel(std::size_t p) const noexcept { return data_.data() + p * dim_ * kPanelWidth; }
  std::span<const float> norms() const noexcept { return norms_; }

 private:
  std::size_t n_rows_;
  std::size_t dim_;
  std::size_t n_panels_;
  std::vector<float> data_;
  std::vector<float> norms_;
};

/// Squared norm of every row, accumulated in float in dimension order.
std::vector<float> squared_norms(std::span<const float> values, std::size_t n_rows,
                                 std::size_t dim);

/// Up to kQueryGroup query rows, copied and zero-padded for the microkernel.
class QueryGroup {
 public:
  explicit QueryGroup(std::size_t dim) : dim_(dim), rows_(kQueryGroup * dim, 0.0f) {}

  /// Loads `count` <= kQueryGroup consecutive rows starting at `first`.
  void load(std::span<const float> values, std::size_t first, std::size_t count);
  std::size_t count() const noexcept { return count_; }
  const float* data() const noexcept { return rows_.data(); }

 private:
  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<float> rows_;
};

/// Dot products of a query group against panel `p`:
/// out[r * kPanelWidth + j] = q_r . y_{p * kPanelWidth + j}.
void dot_panel(const QueryGroup& queries, const PackedRows& rows, std::size_t p, float* out);

/// Squared distance from the dot product and the two squared norms.
inline float squared_distance(float query_norm, float row_norm, float dot) {
  const float d = query_norm + row_norm - 2.0f * dot;
  return d > 0.0f ? d : 0.0f;
}

/// Direct double-precision squared L2 distance.
double exact_squared_distance(std::span<const float> a, std::span<const float> b);

}  // namespace embclust::kernel
