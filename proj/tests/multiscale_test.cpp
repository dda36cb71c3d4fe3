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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "empwass/dyadic.hpp"
#include "empwass/errors.hpp"
#include "empwass/measures.hpp"
#include "empwass/multiscale.hpp"
#include "empwass/rng.hpp"
#include "empwass/transport.hpp"

namespace empwass {
namespace {

// Direct evaluation of Delta_p and D_p for two discrete measures, written
// without the library's dyadic helpers: every atom is located by scanning
// the half-open intervals (-2^m, 2^m] and (lo_c, hi_c] one by one.
struct Located {
  int m;
  std::vector<int> cell;
};

Located locate(std::span<const double> x, int level) {
  int m = 0;
  for (;; ++m) {
    const double h = std::ldexp(1.0, m);
    bool inside = true;
    for (double v : x) inside = inside && v > -h && v <= h;
    if (inside) break;
  }
  Located out{m, {}};
  const double side = std::ldexp(2.0, -level);
  for (double v : x) {
    const double y = std::ldexp(v, -m);
    int c = 0;
    while (y > -1.0 + side * (c + 1)) ++c;
    out.cell.push_back(c);
  }
  return out;
}

struct Oracle {
  double delta = 0.0;
  double d = 0.0;
};

Oracle brute_force(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                   int m_max, int l_max) {
  using Key = std::pair<int, std::vector<int>>;
  Oracle out;
  std::vector<double> block_a(m_max + 1), block_b(m_max + 1);
  std::vector<std::map<Key, std::pair<double, double>>> levels(l_max + 1);
  for (int level = 0; level <= l_max; ++level) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Located c = locate(a.point(i), level);
      if (c.m > m_max) continue;
      levels[level][{c.m, c.cell}].first += a.weight(i);
      if (level == 0) block_a[c.m] += a.weight(i);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Located c = locate(b.point(i), level);
      if (c.m > m_max) continue;
      levels[level][{c.m, c.cell}].second += b.weight(i);
      if (level == 0) block_b[c.m] += b.weight(i);
    }
  }
  for (int m = 0; m <= m_max; ++m) {
    const double wm = std::pow(2.0, p * m);
    const double lo = std::min(block_a[m], block_b[m]);
    out.d += wm * std::abs(block_a[m] - block_b[m]);
    for (int level = 0; level <= l_max; ++level) {
      double raw = 0.0;
      double normalized = 0.0;
      for (const auto& [key, masses] : levels[level]) {
        if (key.first != m) continue;
        raw += std::abs(masses.first - masses.second);
        if (lo > 0.0) {
          normalized += std::abs(masses.first / block_a[m] - masses.second / block_b[m]);
        }
      }
      out.delta += wm * std::pow(2.0, -p * level) * raw;
      if (level >= 1 && lo > 0.0) {
        out.d += wm * lo * (std::pow(2.0, p) - 1.0) / 2.0 * std::pow(2.0, -p * level) *
                 normalized;
      }
    }
  }
  return out;
}

EmpiricalMeasure at(std::vector<double> v) { return EmpiricalMeasure(1, std::move(v)); }

TEST(BlockIndex, HalfOpenFaces) {
  EXPECT_EQ(block_index(std::vector<double>{0.5, -0.25}), 0);
  EXPECT_EQ(block_index(std::vector<double>{2.0, 0.0}), 1);
  EXPECT_EQ(block_index(std::vector<double>{2.0001, 0.0}), 2);
  EXPECT_EQ(block_index(std::vector<double>{-1.0}), 1);
  EXPECT_EQ(block_index(std::vector<double>{1.0}), 0);
  EXPECT_EQ(block_index(std::vector<double>{-2.0}), 2);
}

TEST(CellKey, Examples) {
  EXPECT_EQ(cell_key(std::vector<double>{0.5}, 0, 1).cell,
            std::vector<std::uint32_t>({1}));
  EXPECT_EQ(cell_key(std::vector<double>{-0.5}, 0, 2).cell,
            std::vector<std::uint32_t>({0}));
  EXPECT_EQ(cell_key(std::vector<double>{2.0, 2.0}, 1, 0).cell,
            std::vector<std::uint32_t>({0, 0}));
  EXPECT_THROW(cell_key(std::vector<double>{0.5}, 1, 2), InputError);
}

TEST(CellKey, MatchesScanOracle) {
  Stream s(17);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> x(2);
    for (double& v : x) {
      // Mix of generic points and exact dyadic rationals on faces.
      v = trial % 2 ? 6.0 * s.normal()
                    : std::ldexp(static_cast<double>(s.below(64)) - 32.0, -3);
    }
    const int level = static_cast<int>(s.below(6));
    const Located want = locate(x, level);
    const DyadicCellKey got = cell_key(x, block_index(x), level);
    ASSERT_EQ(got.m, want.m);
    for (std::size_t k = 0; k < x.size(); ++k) {
      ASSERT_EQ(static_cast<int>(got.cell[k]), want.cell[k]) << x[0] << " " << x[1];
    }
  }
}

TEST(DeltaP, DiracPair) {
  const auto ref = parse_measure("dirac:at=-0.5");
  for (int l_max : {1, 4, 10}) {
    const auto prof = delta_p(at({0.5}), *ref, 1.0, 3, l_max);
    EXPECT_NEAR(prof.delta_p, 2.0 * (1.0 - std::ldexp(1.0, -l_max)), 1e-12);
    EXPECT_NEAR(prof.d_p, 1.0 - std::ldexp(1.0, -l_max), 1e-12);
    const Oracle o = brute_force(at({0.5}), at({-0.5}), 1.0, 3, l_max);
    EXPECT_NEAR(prof.delta_p, o.delta, 1e-12);
    EXPECT_NEAR(prof.d_p, o.d, 1e-12);
  }
  // W_1 = 1 <= C Delta_1 holds with C >= 1/2.
  EXPECT_NEAR(wasserstein_1d(at({0.5}), at({-0.5}), 1).value, 1.0, 1e-15);
}

TEST(DeltaP, SelfReferenceVanishes) {
  const auto mu = parse_measure("pareto_prod:beta=2,d=2");
  const EmpiricalMeasure x = sample(*mu, 200, 5);
  const auto ref = atomic_measure(x);
  const auto prof = delta_p(x, *ref, 2.0, 10, 6);
  // Masses agree up to summation order.
  EXPECT_NEAR(prof.delta_p, 0.0, 1e-11);
  EXPECT_NEAR(prof.d_p, 0.0, 1e-11);
}

TEST(DeltaP, MatchesBruteForceOnAtomicReferences) {
  Stream s(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + s.below(3);
    const double p = trial % 2 ? 1.0 : 2.0;
    std::vector<double> a(20 * d), b(15 * d);
    for (double& v : a) v = 3.0 * s.normal();
    for (double& v : b) v = std::ldexp(static_cast<double>(s.below(32)) - 16.0, -2);
    const EmpiricalMeasure x(d, a);
    const EmpiricalMeasure y(d, b);
    const auto prof = delta_p(x, *atomic_measure(y), p, 6, 4);
    const Oracle o = brute_force(x, y, p, 6, 4);
    EXPECT_NEAR(prof.delta_p, o.delta, 1e-12 * (1.0 + o.delta)) << trial;
    EXPECT_NEAR(prof.d_p, o.d, 1e-12 * (1.0 + o.d)) << trial;
    const auto functional = d_p_functional(x, *atomic_measure(y), p, 6, 4);
    EXPECT_NEAR(functional.value, o.d, 1e-12 * (1.0 + o.d)) << trial;
  }
}

TEST(DeltaP, BlockTotalsAddUp) {
  const auto mu = parse_measure("uniform_sym:d=2");
  const EmpiricalMeasure x = sample(*mu, 300, 8);
  const auto prof = delta_p(x, *mu, 1.5, 4, 5);
  double total = 0.0;
  for (const BlockTerms& b : prof.per_block) {
    for (std::size_t l = 0; l < b.cell_discrepancy.size(); ++l) {
      EXPECT_GE(b.cell_discrepancy[l], 0.0);
      total += std::pow(2.0, 1.5 * b.m) * std::pow(2.0, -1.5 * static_cast<double>(l)) *
               b.cell_discrepancy[l];
    }
  }
  EXPECT_NEAR(total, prof.delta_p, 1e-12 * prof.delta_p);
}

TEST(DeltaP, BoundsDpUpToConstantOnUniformSquare) {
  const auto mu = parse_measure("uniform:d=2");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EmpiricalMeasure x = sample(*mu, 100, seed);
    for (double p : {1.0, 2.0, 3.0}) {
      const auto prof = delta_p(x, *mu, p, 4, default_l_max(2));
      EXPECT_LE(prof.d_p, lemma_ratio(p) * prof.delta_p + prof.tail_bound + 1e-12);
    }
  }
}

TEST(DeltaP, SplitAtCubeBoundsTotal) {
  const auto mu = parse_measure("pareto:beta=1.5");
  const EmpiricalMeasure x = sample(*mu, 500, 3);
  for (double m : {0.5, 2.0, 8.0, 100.0}) {
    const auto prof = delta_p(x, *mu, 1.0, 12, 6, m);
    EXPECT_GE(prof.a_pm + prof.b_pm, prof.delta_p - 1e-12) << m;
  }
}

TEST(DeltaP, ShrinksWithSampleSize) {
  const auto mu = parse_measure("uniform");
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double big = delta_p(sample(*mu, 10000, seed, 1), *mu, 1.0, 2, 10).delta_p;
    const double small = delta_p(sample(*mu, 100, seed, 2), *mu, 1.0, 2, 10).delta_p;
    wins += big < small;
  }
  EXPECT_GE(wins, 95);
}

TEST(DeltaP, Errors) {
  const auto mu = parse_measure("uniform:d=2");
  EXPECT_THROW(delta_p(at({0.5}), *mu, 1.0, 2, 2), InputError);
}

TEST(DeltaP, TruncationBoundCoversDeeperLevels) {
  const auto mu = parse_measure("pareto_prod:beta=3,d=2");
  const EmpiricalMeasure x = sample(*mu, 200, 31);
  const auto coarse = delta_p(x, *mu, 1.0, 3, 3);
  const auto fine = delta_p(x, *mu, 1.0, 8, 8);
  EXPECT_LE(fine.delta_p - coarse.delta_p, coarse.tail_bound * (1.0 + 1e-9));
  const auto d_coarse = d_p_functional(x, *mu, 1.0, 3, 3);
  const auto d_fine = d_p_functional(x, *mu, 1.0, 8, 8);
  EXPECT_LE(std::abs(d_fine.value - d_coarse.value), d_coarse.tail_bound * (1.0 + 1e-9));
}

TEST(Kappa, ConstantRatio) {
  std::vector<KappaObservation> obs;
  for (std::size_t n : {64, 128, 256, 512, 1024, 2048}) {
    obs.push_back({n, 0.8 / std::sqrt(static_cast<double>(n)),
                   1.0 / std::sqrt(static_cast<double>(n))});
  }
  const KappaStats k = empirical_kappa(obs);
  EXPECT_NEAR(k.max_ratio, 0.8, 1e-15);
  EXPECT_NEAR(k.median_ratio, 0.8, 1e-15);
  EXPECT_FALSE(k.positive_trend);
}

TEST(Kappa, DetectsGrowth) {
  std::vector<KappaObservation> obs;
  Stream s(2);
  for (int rep = 0; rep < 10; ++rep) {
    for (std::size_t n : {64, 256, 1024, 4096}) {
      obs.push_back({n, 0.1 * std::log(static_cast<double>(n)) + 0.01 * s.uniform(), 1.0});
    }
  }
  EXPECT_TRUE(empirical_kappa(obs).positive_trend);
}

TEST(Kappa, DiracPairRatioIsOne) {
  const auto ref = parse_measure("dirac:at=-0.5");
  const double d = d_p_functional(at({0.5}), *ref, 1.0, 3, 30).value;
  EXPECT_NEAR(1.0 / d, 1.0, 1e-8);
}

TEST(Kappa, Preconditions) {
  std::vector<KappaObservation> obs(4, {10, 1.0, 1.0});
  EXPECT_THROW(empirical_kappa(obs), InputError);
  obs.resize(5);
  obs[2].dp = 0.0;
  EXPECT_THROW(empirical_kappa(obs), std::logic_error);
}

}  // namespace
}  // namespace empwass
