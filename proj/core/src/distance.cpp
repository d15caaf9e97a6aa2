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

#include "embclust/distance.hpp"

#include <algorithm>
#include <cstring>

namespace embclust::kernel {

PackedRows::PackedRows(std::span<const float> values, std::size_t n_rows, std::size_t dim)
    : n_rows_(n_rows),
      dim_(dim),
      n_panels_((n_rows + kPanelWidth - 1) / kPanelWidth),
      data_(n_panels_ * dim * kPanelWidth, 0.0f),
      norms_(squared_norms(values, n_rows, dim)) {
  for (std::size_t i = 0; i < n_rows; ++i) {
    float* panel = data_.data() + (i / kPanelWidth) * dim * kPanelWidth;
    const std::size_t lane = i % kPanelWidth;
    const float* src = values.data() + i * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      panel[d * kPanelWidth + lane] = src[d];
    }
  }
}

std::vector<float> squared_norms(std::span<const float> values, std::size_t n_rows,
                                 std::size_t dim) {
  std::vector<float> out(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const float* x = values.data() + i * dim;
    float s = 0.0f;
    for (std::size_t d = 0; d < dim; ++d) {
      s += x[d] * x[d];
    }
    out[i] = s;
  }
  return out;
}

void QueryGroup::load(std::span<const float> values, std::size_t first, std::size_t count) {
  count_ = std::min(count, kQueryGroup);
  std::memcpy(rows_.data(), values.data() + first * dim_, count_ * dim_ * sizeof(float));
  std::fill(rows_.begin() + static_cast<std::ptrdiff_t>(count_ * dim_), rows_.end(), 0.0f);
}

namespace {
// One accumulator vector per query row; the panel row for dimension d is a
// single vector load.
using Lane = float __attribute__((vector_size(kPanelWidth * sizeof(float))));
}  // namespace

void dot_panel(const QueryGroup& queries, const PackedRows& rows, std::size_t p, float* out) {
  const std::size_t dim = rows.dim();
  const float* __restrict q = queries.data();
  const float* __restrict panel = rows.panel(p);
  Lane acc[kQueryGroup] = {};
  for (std::size_t d = 0; d < dim; ++d) {
    Lane col;
    std::memcpy(&col, panel + d * kPanelWidth, sizeof col);
    for (std::size_t r = 0; r < kQueryGroup; ++r) {
      acc[r] += q[r * dim + d] * col;
    }
  }
  std::memcpy(out, acc, sizeof acc);
}

double exact_squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += diff * diff;
  }
  return s;
}

}  // namespace embclust::kernel
