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

#include "empwass/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace empwass::kernels {

namespace {

inline double point_cost(std::span<const double> a, std::span<const double> b,
                         double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  if (p == 2.0) return s;
  const double r = std::sqrt(s);
  return p == 1.0 ? r : std::pow(r, p);
}

// -eps * log sum_j exp((potential[j] - row(j)) / eps), two passes for
// stability.
template <typename RowCost>
double soft_min(std::size_t cols, std::span<const double> potential,
                double eps, RowCost&& row) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cols; ++j) {
    best = std::max(best, potential[j] - row(j));
  }
  if (!std::isfinite(best)) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    sum += std::exp((potential[j] - row(j) - best) / eps);
  }
  return -(best + eps * std::log(sum));
}

}  // namespace

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

void cost_matrix(const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                 double p, std::span<double> out, Backend backend) {
  const auto rows = static_cast<std::ptrdiff_t>(x.size());
  const std::size_t cols = y.size();
  auto fill_row = [&](std::ptrdiff_t i) {
    auto xi = x.point(static_cast<std::size_t>(i));
    double* dst = out.data() + static_cast<std::size_t>(i) * cols;
    for (std::size_t j = 0; j < cols; ++j) dst[j] = point_cost(xi, y.point(j), p);
  };
  if (backend == Backend::kSerial) {
    for (std::ptrdiff_t i = 0; i < rows; ++i) fill_row(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) fill_row(i);
}

CostView CostView::dense(std::span<const double> values, std::size_t rows,
                         std::size_t cols) {
  CostView view;
  view.values_ = values;
  view.rows_ = rows;
  view.cols_ = cols;
  return view;
}

CostView CostView::streamed(const EmpiricalMeasure& x,
                            const EmpiricalMeasure& y, double p) {
  CostView view;
  view.x_ = &x;
  view.y_ = &y;
  view.p_ = p;
  view.rows_ = x.size();
  view.cols_ = y.size();
  return view;
}

double CostView::operator()(std::size_t i, std::size_t j) const {
  if (!values_.empty()) return values_[i * cols_ + j];
  return point_cost(x_->point(i), y_->point(j), p_);
}

namespace {

template <typename RowFn>
void for_rows(std::size_t rows, RowFn&& fn, Backend backend) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
  if (backend == Backend::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace

void soft_min_rows(const CostView& cost, std::span<const double> potential,
                   double eps, std::span<double> out, Backend backend) {
  const std::size_t cols = cost.cols();
  for_rows(
      cost.rows(),
      [&](std::size_t i) {
        out[i] = soft_min(cols, potential, eps,
                          [&](std::size_t j) { return cost(i, j); });
      },
      backend);
}

void plan_row_sums(const CostView& cost, std::span<const double> f,
                   std::span<const double> g, double eps,
                   std::span<double> out, Backend backend) {
  const std::size_t cols = cost.cols();
  for_rows(
      cost.rows(),
      [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          s += std::exp((f[i] + g[j] - cost(i, j)) / eps);
        }
        out[i] = s;
      },
      backend);
}

void plan_row_costs(const CostView& cost, std::span<const double> f,
                    std::span<const double> g, double eps,
                    std::span<double> out, Backend backend) {
  const std::size_t cols = cost.cols();
  for_rows(
      cost.rows(),
      [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          const double c = cost(i, j);
          s += std::exp((f[i] + g[j] - c) / eps) * c;
        }
        out[i] = s;
      },
      backend);
}

void weighted_row_costs(const CostView& cost, std::span<const double> w,
                        std::span<double> out, Backend backend) {
  const std::size_t cols = cost.cols();
  for_rows(
      cost.rows(),
      [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += w[j] * cost(i, j);
        out[i] = s;
      },
      backend);
}

void dyadic_locate(const EmpiricalMeasure& x, int level,
                   std::span<int> blocks, std::span<std::uint32_t> cells,
                   CellConvention convention, Backend backend) {
  const std::size_t d = x.dim();
  auto one = [&](std::ptrdiff_t i) {
    const auto r = static_cast<std::size_t>(i);
    auto pt = x.point(r);
    const int m = block_index(pt);
    blocks[r] = m;
    for (std::size_t k = 0; k < d; ++k) {
      cells[r * d + k] = cell_coordinate(pt[k], m, level, convention);
    }
  };
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (backend == Backend::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
}

}  // namespace empwass::kernels
