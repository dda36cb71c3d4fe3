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

#include "empwass/errors.hpp"
#include "empwass/theory.hpp"
#include "theory_fixture.hpp"

namespace empwass::theory {
namespace {

using R = Rational;

ProblemParams make(R p, int d, R r, MomentKind kind = MomentKind::kWeak,
                   bool sqrt_tail = false) {
  ProblemParams params;
  params.p = p;
  params.d = d;
  params.r = r;
  params.moment_kind = kind;
  params.sqrt_tail_integrable = sqrt_tail;
  return params;
}

class FixtureTable : public ::testing::TestWithParam<std::size_t> {};

TEST_P(FixtureTable, ReproducesRow) {
  const auto rows = fixture::rows();
  const std::string failure = fixture::check(rows[GetParam()]);
  EXPECT_TRUE(failure.empty()) << failure;
}

INSTANTIATE_TEST_SUITE_P(Rows, FixtureTable, ::testing::Range<std::size_t>(0, 40));

TEST(Fixture, HasFortyRows) { EXPECT_EQ(fixture::rows().size(), 40u); }

TEST(Classify, Examples) {
  EXPECT_EQ(classify(make(1, 1, R(3, 2))), Regime::kSmallDim);
  EXPECT_EQ(classify(make(1, 3, R(3, 2))), Regime::kBoundary);
  EXPECT_EQ(classify(make(1, 4, 3)), Regime::kLargeDim);
}

TEST(Classify, MonotoneInP) {
  for (int d = 1; d <= 6; ++d) {
    for (R r : {R(5, 4), R(3, 2), R(2), R(3), R(7)}) {
      int prev = -1;
      for (int k = 0; k <= 40; ++k) {
        const R p = R(1) + R(k, 8);
        const int rank = classify(make(p, d, r)) == Regime::kLargeDim   ? 0
                         : classify(make(p, d, r)) == Regime::kBoundary ? 1
                                                                          : 2;
        EXPECT_GE(rank, prev) << "d=" << d << " r=" << to_string(r);
        prev = rank;
      }
    }
  }
}

TEST(Classify, RejectsInvalid) {
  EXPECT_THROW(classify(make(R(1, 2), 1, 2)), InputError);
  EXPECT_THROW(classify(make(1, 0, 2)), InputError);
  EXPECT_THROW(classify(make(1, 1, 1)), InputError);
}

TEST(MomentRate, Examples) {
  const auto a = moment_rate(make(1, 1, R(3, 2)), Statistic::kMean);
  EXPECT_EQ(a.exponent, R(-1, 3));
  EXPECT_EQ(a.log_power, R(0));
  const auto b = moment_rate(make(1, 3, 3, MomentKind::kWeak, true), Statistic::kSecondMoment);
  EXPECT_EQ(b.exponent, R(-2, 3));
  const auto c = moment_rate(make(2, 4, 3, MomentKind::kStrong, true), Statistic::kRMoment);
  EXPECT_EQ(c.regime, Regime::kBoundary);
  EXPECT_EQ(c.exponent, R(-3, 2));
  EXPECT_EQ(c.log_power, R(3));
}

TEST(MomentRate, RosenthalGammaCorrection) {
  // d/2 < p <= d(r-1)/r: second term n^(gamma - pr/d).
  auto params = make(2, 3, 3, MomentKind::kStrong, true);
  const auto pred = moment_rate(params, Statistic::kRMoment);
  ASSERT_EQ(pred.terms.size(), 2u);
  // gamma = (1/10)(4 - 3) / (3 (1 + 1/10)) = 1/33.
  EXPECT_EQ(pred.terms[1].exponent, R(1, 33) - R(2));
  params.epsilon = R(1, 2);
  // gamma = (1/2) / (3 * 3/2) = 1/9.
  EXPECT_EQ(moment_rate(params, Statistic::kRMoment).terms[1].exponent, R(1, 9) - R(2));
}

TEST(MomentRate, ContinuousAcrossBoundary) {
  for (int d = 1; d <= 6; ++d) {
    for (R r : {R(5, 4), R(3, 2), R(7, 4)}) {
      const R thr = R(d) * (r - 1) / r;
      if (thr < R(1)) continue;
      const R small = -(r - 1) / r;
      const R large = -thr / R(d);
      EXPECT_EQ(small, large);
      if (thr - R(1, 1000) >= R(1)) {
        const auto above = moment_rate(make(thr + R(1, 1000), d, r), Statistic::kMean);
        const auto below = moment_rate(make(thr - R(1, 1000), d, r), Statistic::kMean);
        EXPECT_NEAR(to_double(above.exponent), to_double(below.exponent), 2e-3);
      }
    }
  }
}

TEST(MomentRate, ExponentsNegative) {
  for (R p : {R(1), R(3, 2), R(2), R(5, 2)}) {
    for (int d = 1; d <= 6; ++d) {
      for (R r : {R(5, 4), R(3, 2), R(3), R(6)}) {
        for (Statistic s : {Statistic::kDeviationProb, Statistic::kMean,
                            Statistic::kSecondMoment, Statistic::kRMoment,
                            Statistic::kAsRate, Statistic::kLilRate}) {
          try {
            const auto pred = moment_rate(make(p, d, r, MomentKind::kStrong, r > R(2)), s);
            if (!pred.no_prediction) {
              EXPECT_LT(pred.exponent, R(0)) << to_string(s);
              EXPECT_GE(pred.log_power, R(0));
            }
          } catch (const InputError&) {
          }
        }
      }
    }
  }
}

TEST(MomentRate, IncompatibleCombinations) {
  EXPECT_THROW(moment_rate(make(1, 1, 3), Statistic::kSecondMoment), InputError);
  EXPECT_THROW(moment_rate(make(1, 1, R(3, 2)), Statistic::kRMoment), InputError);
  EXPECT_THROW(moment_rate(make(1, 1, 2, MomentKind::kStrong), Statistic::kRMoment),
               InputError);
  EXPECT_THROW(moment_rate(make(1, 1, 3, MomentKind::kStrong), Statistic::kAsRate),
               InputError);
  EXPECT_THROW(moment_rate(make(1, 1, 3), Statistic::kLilRate), InputError);
}

TEST(MomentRate, NearBoundaryWarning) {
  const auto pred = moment_rate(make(R(101, 100), 3, R(3, 2)), Statistic::kMean);
  EXPECT_TRUE(pred.near_boundary);
  EXPECT_FALSE(pred.note.empty());
  EXPECT_FALSE(moment_rate(make(2, 3, R(3, 2)), Statistic::kMean).near_boundary);
}

TEST(MomentRate, DimensionOverrideIsExploratory) {
  auto params = make(1, 4, R(3, 2));
  params.dimension_override = 2;
  const auto pred = moment_rate(params, Statistic::kMean);
  EXPECT_TRUE(pred.exploratory);
  EXPECT_EQ(pred.regime, Regime::kSmallDim);
}

TEST(DeviationBound, DoublingNShrinksBySmallDimFactor) {
  const auto params = make(1, 1, R(3, 2));
  const double a = deviation_bound(params, 1000, 0.3).value;
  const double b = deviation_bound(params, 2000, 0.3).value;
  EXPECT_NEAR(b / a, std::pow(2.0, -0.5), 1e-12);
  EXPECT_EQ(deviation_bound(params, 1000, 0.3).label, "shape only");
}

TEST(DeviationBound, DoublingNShrinksByLargeDimFactor) {
  const auto params = make(1, 4, R(3, 2));
  const double a = deviation_bound(params, 1000, 0.3).value;
  const double b = deviation_bound(params, 2000, 0.3).value;
  EXPECT_NEAR(b / a, std::pow(2.0, -0.375), 1e-12);
}

TEST(DeviationBound, DoublingXScalesByMinusR) {
  for (int d : {1, 4}) {
    const auto params = make(1, d, R(3, 2));
    const double a = deviation_bound(params, 500, 0.2).value;
    const double b = deviation_bound(params, 500, 0.4).value;
    EXPECT_NEAR(b / a, std::pow(2.0, -1.5), 1e-12);
  }
}

TEST(DeviationBound, NonIncreasing) {
  for (int d = 1; d <= 4; ++d) {
    for (R r : {R(3, 2), R(3)}) {
      const auto params = make(1, d, r);
      const bool boundary = r < R(2) && classify(params) == Regime::kBoundary;
      for (double x : {0.05, 0.3, 2.0}) {
        double prev = INFINITY;
        for (double n = 1024; n <= 1 << 20; n *= 2) {
          const double v = deviation_bound(params, n, x).value;
          EXPECT_LE(v, prev * (1 + 1e-12)) << d << " " << n;
          prev = v;
        }
      }
      if (boundary) continue;
      for (double n : {10.0, 1000.0}) {
        double prev = INFINITY;
        for (double x = 0.01; x < 10; x *= 1.5) {
          const double v = deviation_bound(params, n, x).value;
          EXPECT_LE(v, prev * (1 + 1e-12)) << d << " " << x;
          prev = v;
        }
      }
    }
  }
}

TEST(DeviationBound, Errors) {
  EXPECT_THROW(deviation_bound(make(1, 1, R(3, 2)), 0.5, 1), InputError);
  EXPECT_THROW(deviation_bound(make(1, 1, R(3, 2)), 10, 0), InputError);
  EXPECT_THROW(deviation_bound(make(1, 1, 3), 10, 1, 2.5), InputError);
}

TEST(BaumKatz, Examples) {
  const auto a = baum_katz_weights(make(1, 1, R(3, 2), MomentKind::kStrong), R(2, 3));
  EXPECT_TRUE(a.admissible);
  EXPECT_EQ(a.weight_exponent, R(-1));
  const auto b = baum_katz_weights(make(1, 4, R(3, 2), MomentKind::kStrong), R(1, 2));
  EXPECT_FALSE(b.admissible);
  EXPECT_EQ(b.lo, R(3, 4));
  EXPECT_FALSE(b.lo_closed);
  EXPECT_EQ(b.hi, R(1));
  for (R r : {R(5, 4), R(3, 2), R(3), R(5)}) {
    const auto params = make(R(5, 2), 1, r, MomentKind::kStrong);
    const auto c = baum_katz_weights(params, 1);
    ASSERT_TRUE(c.admissible);
    EXPECT_EQ(c.weight_exponent, r - 2);
  }
}

TEST(ToRational, RecoversSimpleFractions) {
  EXPECT_EQ(to_rational(1.5), R(3, 2));
  EXPECT_EQ(to_rational(1.0 / 3.0), R(1, 3));
  EXPECT_EQ(to_rational(-0.125), R(-1, 8));
  EXPECT_THROW(to_rational(1.000000001), InputError);
  EXPECT_THROW(to_rational(NAN), InputError);
}

TEST(ExportTable, CoversGrid) {
  const auto table = export_table();
  EXPECT_EQ(table.size(), 3u * 4u * 2u * 6u);
  for (const auto& row : table) {
    EXPECT_TRUE(row.contains("prediction") || row.contains("error"));
  }
}

}  // namespace
}  // namespace empwass::theory
