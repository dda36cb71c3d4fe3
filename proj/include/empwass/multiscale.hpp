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

#ifndef EMPWASS_MULTISCALE_HPP_
#define EMPWASS_MULTISCALE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "empwass/dyadic.hpp"
#include "empwass/kernels.hpp"
#include "empwass/measures.hpp"

namespace empwass {

// Which part of a cell a mass refers to, relative to C_M = [-M, M]^d.
enum class Region { kAll, kInsideCube, kOutsideCube };

// Returns the key of the level-l cell of block m containing x; throws if x
// is not in B_m.
DyadicCellKey cell_key(std::span<const double> x, int m, int level,
                       CellConvention convention = CellConvention::kUpperClosed);

// mu(2^m F intersected with B_m [and C_M or its complement]).
double cell_mass(const AnalyticMeasure& mu, const DyadicCellKey& key,
                 Region region = Region::kAll, double cube_half_width = 0.0);
// mu(B_m).
double block_mass(const AnalyticMeasure& mu, int m);

struct BlockTerms {
  int m = 0;
  double sample_mass = 0.0;     // mu_n(B_m)
  double reference_mass = 0.0;  // mu(B_m)
  // Index l: sum over cells F of |mu_n(2^m F ∩ B_m) - mu(2^m F ∩ B_m)|.
  std::vector<double> cell_discrepancy;
  // Index l: same with both measures normalized by their block masses; all
  // zero when either block mass vanishes.
  std::vector<double> normalized_discrepancy;
  // Number of sample points of the block (partition-of-unity checks).
  std::size_t sample_count = 0;
  // Index l: total count over occupied cells.
  std::vector<std::size_t> cell_counts;
};

struct MultiscaleProfile {
  double p = 1.0;
  int m_max = 0;
  int l_max = 0;
  std::vector<BlockTerms> per_block;
  double delta_p = 0.0;
  double d_p = 0.0;
  // Upper bounds on the omitted m > m_max and l > l_max contributions.
  double tail_bound = 0.0;
  double d_tail_bound = 0.0;
  // Sample mass in blocks beyond m_max.
  double sample_mass_beyond = 0.0;
  std::optional<double> cube_half_width;  // M
  double a_pm = 0.0;
  double b_pm = 0.0;
};

struct MultiscaleOptions {
  CellConvention convention = CellConvention::kUpperClosed;
  kernels::Backend backend = kernels::Backend::kOpenMP;
};

// Truncated Delta_p, D_p and (with M) A_{p,M}, B_{p,M} of a sample against a
// reference with a cell-mass oracle.
MultiscaleProfile delta_p(const EmpiricalMeasure& sample,
                          const AnalyticMeasure& reference, double p,
                          int m_max, int l_max,
                          std::optional<double> cube_half_width = std::nullopt,
                          const MultiscaleOptions& options = {});

struct FunctionalValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

FunctionalValue d_p_functional(const EmpiricalMeasure& sample,
                               const AnalyticMeasure& reference, double p,
                               int m_max, int l_max);

// Smallest m with H(2^(m-1)) <= 1e-6.
int default_m_max(const AnalyticMeasure& reference);
// 10 for d <= 2, 6 for d = 3, 4 beyond.
int default_l_max(std::size_t dim);
// max(3/2, (2^p - 1)/2).
double lemma_ratio(double p);

// Truncation cube half-width M: (n x)^(1/p) when the sampling fluctuation
// dominates, n^(1/d) x^(1/p) otherwise.
double default_cube_half_width(std::size_t n, double x, double p,
                               std::size_t dim, bool small_dimension);

struct KappaObservation {
  std::size_t n = 0;
  double wp = 0.0;  // W_p^p
  double dp = 0.0;  // D_p
};

struct KappaStats {
  std::size_t count = 0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  // OLS of ratio on log n.
  double trend_slope = 0.0;
  double trend_stderr = 0.0;
  double trend_p_value = 1.0;  // one-sided, H1: slope > 0
  bool positive_trend = false;
};

// Ratios W_p^p / D_p; throws std::logic_error when D_p = 0 < W_p^p.
KappaStats empirical_kappa(std::span<const KappaObservation> observations,
                           double significance = 0.05);

}  // namespace empwass

#endif  // EMPWASS_MULTISCALE_HPP_
