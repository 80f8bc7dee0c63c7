// Copyright 2026 The soundscene authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "soundscene/common.hpp"

namespace soundscene::nn {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

/// Feature-map batches are vectors of (T*F) x C matrices; row index t*F + f.
template <typename S>
using Batch = std::vector<Matrix<S>>;

struct GridShape {
  Eigen::Index t = 0;  // time frames
  Eigen::Index f = 0;  // frequency bands
  Eigen::Index c = 0;  // channels
  Eigen::Index rows() const { return t * f; }
};

template <typename S>
struct Param {
  std::string name;
  Matrix<S> value;
  Matrix<S> grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

enum class Mode { train, eval };

/// Run fn(0..n-1) over a small worker pool. Items must write only their own
/// slots; reductions over the results stay in index order, so outputs are
/// bitwise identical no matter how the items were scheduled. Workloads below
/// `cost_hint` arithmetic ops per item run serially: thread spawns cost more
/// than they save on the small shapes used in gradient checks.
inline void parallel_for_items(std::size_t n, const std::function<void(std::size_t)>& fn,
                               double cost_hint = 1e9) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::size_t workers = std::min<std::size_t>(n, hw);
  if (cost_hint < 2e5) workers = 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace soundscene::nn
