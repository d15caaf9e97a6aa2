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

namespace embclust::parallel {

/// Worker count used by every parallel stage. Defaults to the OpenMP default,
/// or EMBCLUST_THREADS when set in the environment.
int num_threads();
void set_num_threads(int n);
int hardware_threads();

/// Fixed chunk size for reductions, independent of the thread count so
/// floating-point sums are reproducible across thread settings.
inline constexpr std::size_t kReductionChunk = 2048;

/// Scoped override of the worker count.
class ThreadScope {
 public:
  explicit ThreadScope(int n) : saved_(num_threads()) { set_num_threads(n); }
  ~ThreadScope() { set_num_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

}  // namespace embclust::parallel
