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
// Serial reference vs OpenMP backend for the hot kernels.
//
//   ./build/bench/empwass_bench --benchmark_filter=cost_matrix

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "empwass/kernels.hpp"
#include "empwass/measures.hpp"

namespace {

using empwass::kernels::Backend;
using empwass::kernels::CostView;

empwass::EmpiricalMeasure cloud(std::size_t n, int d, std::uint64_t stream) {
  auto ref = empwass::parse_measure("uniform:d=" + std::to_string(d));
  return empwass::sample(*ref, n, 7, stream);
}

Backend backend_of(const benchmark::State& state) {
  return state.range(1) == 0 ? Backend::kSerial : Backend::kOpenMP;
}

void BM_cost_matrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = cloud(n, 3, 0);
  const auto y = cloud(n, 3, 1);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    empwass::kernels::cost_matrix(x, y, 1.0, out, backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

void BM_soft_min_rows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = cloud(n, 3, 0);
  const auto y = cloud(n, 3, 1);
  const auto cost = CostView::streamed(x, y, 1.0);
  std::vector<double> g(n, 0.0), out(n);
  for (auto _ : state) {
    empwass::kernels::soft_min_rows(cost, g, 0.05, out, backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

void BM_plan_row_sums(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = cloud(n, 3, 0);
  const auto y = cloud(n, 3, 1);
  std::vector<double> values(n * n);
  empwass::kernels::cost_matrix(x, y, 1.0, values, Backend::kSerial);
  const auto cost = CostView::dense(values, n, n);
  std::vector<double> f(n, 0.0), g(n, 0.0), out(n);
  for (auto _ : state) {
    empwass::kernels::plan_row_sums(cost, f, g, 0.05, out, backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

void BM_dyadic_locate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = cloud(n, 2, 0);
  const int level = 8;
  std::vector<int> blocks(n);
  std::vector<std::uint32_t> cells(n * x.dim());
  for (auto _ : state) {
    empwass::kernels::dyadic_locate(x, level, blocks, cells,
                                    empwass::CellConvention::kUpperClosed,
                                    backend_of(state));
    benchmark::DoNotOptimize(cells.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}

// Second argument: 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_cost_matrix)->ArgsProduct({{256, 1024, 2048}, {0, 1}});
BENCHMARK(BM_soft_min_rows)->ArgsProduct({{256, 1024, 2048}, {0, 1}});
BENCHMARK(BM_plan_row_sums)->ArgsProduct({{256, 1024, 2048}, {0, 1}});
BENCHMARK(BM_dyadic_locate)->ArgsProduct({{1 << 14, 1 << 18}, {0, 1}});

}  // namespace

BENCHMARK_MAIN();
