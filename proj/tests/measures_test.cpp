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
#include <limits>

#include "empwass/errors.hpp"
#include "empwass/measures.hpp"
#include "empwass/multiscale.hpp"

namespace empwass {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(Sample, UniformSquareStaysInSupport) {
  const auto mu = parse_measure("uniform:d=2");
  const EmpiricalMeasure x = sample(*mu, 4, 7);
  ASSERT_EQ(x.size(), 4u);
  ASSERT_EQ(x.dim(), 2u);
  for (double c : x.coords()) {
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
}

TEST(Sample, ParetoExceedanceWithinThreeStandardErrors) {
  const auto mu = parse_measure("pareto:beta=1.5");
  const EmpiricalMeasure x = sample(*mu, 10000, 1);
  const double h = std::pow(2.0, -1.5);
  const double se = std::sqrt(h * (1.0 - h) / 10000.0);
  EXPECT_NEAR(empirical_tail(x, 2.0), h, 3.0 * se);
}

TEST(Sample, SameSeedSamePoints) {
  const auto mu = parse_measure("pareto_prod:beta=2,d=3");
  const EmpiricalMeasure a = sample(*mu, 50, 99, 4);
  const EmpiricalMeasure b = sample(*mu, 50, 99, 4);
  ASSERT_EQ(a.coords().size(), b.coords().size());
  for (std::size_t i = 0; i < a.coords().size(); ++i) {
    EXPECT_EQ(a.coords()[i], b.coords()[i]);
  }
}

TEST(Sample, RejectsEmpty) {
  const auto mu = parse_measure("uniform");
  EXPECT_THROW(sample(*mu, 0, 1), InputError);
}

TEST(TailH, ClosedForms) {
  EXPECT_DOUBLE_EQ(tail_H(*parse_measure("uniform:d=1"), 0.25), 0.75);
  EXPECT_NEAR(tail_H(*parse_measure("pareto:beta=2"), 3.0), 1.0 / 9.0, 1e-15);
  EXPECT_EQ(tail_H(*parse_measure("uniform:d=3"), 1.5), 0.0);
  EXPECT_EQ(tail_H(*parse_measure("dirac:at=0.5"), 0.5), 0.0);
}

TEST(TailH, ProductOfMaxNorm) {
  // P(max |X_i| > t) = 1 - (1 - t^-beta)^d.
  const auto mu = parse_measure("pareto_prod:beta=3,d=2");
  const double a = std::pow(2.5, -3.0);
  EXPECT_NEAR(tail_H(*mu, 2.5), 1.0 - (1.0 - a) * (1.0 - a), 1e-15);
}

TEST(WeakMoment, ParetoAtItsIndexIsOne) {
  for (double beta : {1.5, 2.0, 3.0}) {
    const auto mu = parse_measure("pareto:beta=" + std::to_string(beta));
    EXPECT_NEAR(weak_moment(*mu, beta), 1.0, 1e-12) << beta;
    EXPECT_EQ(weak_moment(*mu, beta + 0.5), kInf) << beta;
  }
}

TEST(WeakMoment, UniformIsFiniteAndMatchesSupremum) {
  const auto mu = parse_measure("uniform");
  for (double q : {1.0, 1.5, 3.0, 8.0}) {
    // sup_t t^q (1 - t) is attained at t = q / (q + 1).
    const double t = q / (q + 1.0);
    EXPECT_NEAR(weak_moment(*mu, q), std::pow(t, q) * (1.0 - t), 1e-9) << q;
  }
}

TEST(StrongMoment, SplitIntegral) {
  EXPECT_NEAR(strong_moment(*parse_measure("pareto:beta=2"), 1.0), 2.0, 1e-10);
  EXPECT_EQ(strong_moment(*parse_measure("pareto:beta=2"), 2.0), kInf);
  EXPECT_EQ(strong_moment(*parse_measure("dirac:at=0"), 3.0), 0.0);
  EXPECT_NEAR(strong_moment(*parse_measure("uniform"), 2.0), 1.0 / 3.0, 1e-10);
}

TEST(SqrtTailIntegral, ClosedForms) {
  EXPECT_NEAR(sqrt_tail_integral(*parse_measure("uniform"), 1.0), 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(sqrt_tail_integral(*parse_measure("pareto:beta=4"), 1.0), 2.0, 1e-10);
  EXPECT_EQ(sqrt_tail_integral(*parse_measure("pareto:beta=2"), 1.0), kInf);
}

TEST(Quadrature, AgreesWithClosedForms) {
  for (const char* spec : {"uniform:d=2", "uniform_sym:d=3", "pareto:beta=5",
                           "pareto_prod:beta=6,d=2"}) {
    const auto mu = parse_measure(spec);
    for (double q : {1.0, 1.5, 2.0}) {
      const double closed = strong_moment(*mu, q);
      EXPECT_NEAR(quadrature::strong_moment(*mu, q), closed, 1e-8 * (1.0 + closed))
          << spec << " q=" << q;
    }
    const double s = sqrt_tail_integral(*mu, 1.0);
    EXPECT_NEAR(quadrature::sqrt_tail_integral(*mu, 1.0), s, 1e-8 * (1.0 + s)) << spec;
  }
}

TEST(Moments, WeakRootBelowStrongRoot) {
  for (const std::string spec : {"uniform:d=2", "uniform_sym:d=1", "pareto:beta=3",
                                 "pareto_prod:beta=4,d=3", "dirac:at=2"}) {
    const auto mu = parse_measure(spec);
    bool previous_finite = true;
    for (double q = 1.0; q <= 6.0; q += 0.5) {
      const double w = weak_moment(*mu, q);
      const double s = strong_moment(*mu, q);
      if (std::isfinite(s)) {
        EXPECT_LE(std::pow(w, 1.0 / q), std::pow(s, 1.0 / q) * (1.0 + 1e-9))
            << spec << " q=" << q;
      }
      // Once infinite, stays infinite.
      if (!previous_finite) EXPECT_FALSE(std::isfinite(s)) << spec << " q=" << q;
      previous_finite = std::isfinite(s);
    }
  }
}

TEST(TailH, NonIncreasingOnGrid) {
  for (const std::string& name : catalog_names()) {
    const std::string spec = name == "pareto" || name == "pareto_prod"
                                 ? name + ":beta=2"
                                 : name;
    const auto mu = parse_measure(spec);
    double prev = 1.0;
    for (double t = 0.0; t < 100.0; t += 0.37) {
      const double h = tail_H(*mu, t);
      EXPECT_LE(h, prev + 1e-15) << spec << " t=" << t;
      prev = h;
    }
    EXPECT_LT(tail_H(*mu, 1e8), 1e-7) << spec;
  }
}

TEST(TailH, EmpiricalTailWithinFourStandardErrors) {
  for (const char* spec : {"uniform_sym:d=2", "pareto:beta=1.5", "pareto_prod:beta=2,d=2"}) {
    const auto mu = parse_measure(spec);
    const std::size_t n = 100000;
    const EmpiricalMeasure x = sample(*mu, n, 2026);
    for (int k = 1; k <= 10; ++k) {
      const double t = 0.3 * k;
      const double h = tail_H(*mu, t);
      const double se = std::sqrt(std::max(h * (1.0 - h), 1e-12) / n);
      EXPECT_NEAR(empirical_tail(x, t), h, 4.0 * se + 1e-12) << spec << " t=" << t;
    }
  }
}

TEST(CellMass, RefinementConsistency) {
  for (const char* spec : {"uniform:d=1", "uniform_sym:d=2", "pareto:beta=1.5",
                           "pareto_prod:beta=3,d=2"}) {
    const auto mu = parse_measure(spec);
    const std::size_t d = mu->dim();
    const int max_level = d == 1 ? 6 : 4;
    for (int m = 0; m <= 6; ++m) {
      const double whole = cell_mass(*mu, {m, 0, std::vector<std::uint32_t>(d, 0)});
      EXPECT_NEAR(whole, block_mass(*mu, m), 1e-12);
      for (int level = 1; level <= max_level; ++level) {
        const std::uint32_t side = 1u << level;
        std::uint64_t cells = 1;
        for (std::size_t k = 0; k < d; ++k) cells *= side;
        double total = 0.0;
        for (std::uint64_t c = 0; c < cells; ++c) {
          DyadicCellKey key{m, level, std::vector<std::uint32_t>(d)};
          std::uint64_t rest = c;
          for (std::size_t k = 0; k < d; ++k) {
            key.cell[k] = static_cast<std::uint32_t>(rest % side);
            rest /= side;
          }
          total += cell_mass(*mu, key);
        }
        EXPECT_NEAR(total, whole, 1e-10) << spec << " m=" << m << " l=" << level;
      }
    }
  }
}

TEST(BlockMass, SumsToOneWithTail) {
  for (const char* spec : {"uniform:d=3", "pareto:beta=1.5", "pareto_prod:beta=2,d=2",
                           "dirac:at=3,d=2"}) {
    const auto mu = parse_measure(spec);
    const int m_max = 12;
    double total = tail_H(*mu, std::ldexp(1.0, m_max));
    for (int m = 0; m <= m_max; ++m) total += block_mass(*mu, m);
    EXPECT_NEAR(total, 1.0, 1e-10) << spec;
  }
}

TEST(ParseMeasure, Errors) {
  EXPECT_THROW(parse_measure("gauss"), InputError);
  EXPECT_THROW(parse_measure("pareto"), InputError);
  EXPECT_THROW(parse_measure("pareto:beta=2,d=2"), InputError);
  EXPECT_THROW(parse_measure("uniform:d=0"), InputError);
  EXPECT_THROW(parse_measure("uniform:side=2"), InputError);
}

TEST(EmpiricalMeasure, RejectsBadInput) {
  EXPECT_THROW(EmpiricalMeasure(2, {0.0, 1.0, 2.0}), InputError);
  EXPECT_THROW(EmpiricalMeasure(1, {0.0, std::nan("")}), InputError);
  EXPECT_THROW(EmpiricalMeasure(1, {0.0, 1.0}, {0.3, 0.3}), InputError);
}

}  // namespace
}  // namespace empwass
