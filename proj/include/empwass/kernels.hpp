/* Copyright 2026 The empwass Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef EMPWASS_KERNELS_HPP_
#define EMPWASS_KERNELS_HPP_

// Data-parallel inner loops. Every kernel has a serial reference path and an
// OpenMP path; both produce bit-identical output because each output element
// is computed by exactly one iteration in a fixed order.

#include <cstddef>
#include <exception>
#include <span>

#include "empwass/dyadic.hpp"
#include "empwass/measures.hpp"

namespace empwass::kernels {

enum class Backend { kSerial, kOpenMP };

// Threads used by the OpenMP backend; 0 leaves the runtime default.
void set_threads(int threads);
int max_threads();

// out[i * y.size() + j] = |x_i - y_j|_2^p.
void cost_matrix(const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                 double p, std::span<double> out, Backend backend);

// Read-only view of a rows x cols cost matrix: either materialized
// (row-major) or evaluated on the fly as |x_i - y_j|_2^p.
class CostView {
 public:
  static CostView dense(std::span<const double> values, std::size_t rows,
                        std::size_t cols);
  static CostView streamed(const EmpiricalMeasure& x,
                           const EmpiricalMeasure& y, double p);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_dense() const { return !values_.empty(); }
  double operator()(std::size_t i, std::size_t j) const;

 private:
  std::span<const double> values_;
  const EmpiricalMeasure* x_ = nullptr;
  const EmpiricalMeasure* y_ = nullptr;
  double p_ = 1.0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

// Row-wise soft minimum:
//   out[i] = -eps * log sum_j exp((potential[j] - C[i, j]) / eps).
void soft_min_rows(const CostView& cost, std::span<const double> potential,
                   double eps, std::span<double> out, Backend backend);

// Row sums of the Gibbs plan P[i, j] = exp((f[i] + g[j] - C[i, j]) / eps).
void plan_row_sums(const CostView& cost, std::span<const double> f,
                   std::span<const double> g, double eps,
                   std::span<double> out, Backend backend);

// out[i] = sum_j P[i, j] * C[i, j] for the same Gibbs plan.
void plan_row_costs(const CostView& cost, std::span<const double> f,
                    std::span<const double> g, double eps,
                    std::span<double> out, Backend backend);

// out[i] = sum_j w[j] * C[i, j].
void weighted_row_costs(const CostView& cost, std::span<const double> w,
                        std::span<double> out, Backend backend);

// Max-norm block index and finest-level cell coordinates of every point;
// see dyadic.hpp for the conventions. cells has size n * d.
void dyadic_locate(const EmpiricalMeasure& x, int level,
                   std::span<int> blocks, std::span<std::uint32_t> cells,
                   CellConvention convention, Backend backend);

// Calls fn(i) for i in [0, count). Iterations must write disjoint outputs.
// An exception thrown by any iteration is rethrown after the loop.
template <typename Fn>
void for_each_index(std::size_t count, Fn&& fn, Backend backend) {
  if (backend == Backend::kSerial) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(empwass_for_each_index)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace empwass::kernels

#endif  // EMPWASS_KERNELS_HPP_
