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

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "empwass/errors.hpp"
#include "empwass/experiments.hpp"
#include "empwass/kernels.hpp"

namespace empwass::experiments {
namespace {

using nlohmann::json;

json small_rate_config() {
  return {{"measure", "uniform:d=1"}, {"p", 1},          {"r", 3},
          {"statistic", "mean"},      {"estimator", "exact_1d"},
          {"n_grid", {64, 128, 256, 512}},
          {"replicates", 40},          {"seed", 5}};
}

TEST(Config, RoundTrip) {
  json j = small_rate_config();
  j["band"] = 0.2;
  j["x_grid"] = {0.1, 0.2};
  const ExperimentConfig c = parse_config(j);
  EXPECT_EQ(c.n_grid.size(), 4u);
  EXPECT_EQ(c.replicates, 40u);
  EXPECT_EQ(c.estimator, Estimator::kExact1d);
  const ExperimentConfig back = parse_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  json j = small_rate_config();
  j["replicats"] = 10;
  EXPECT_THROW(parse_config(j), InputError);
  j = small_rate_config();
  j["estimator"] = "sinkhorn";
  EXPECT_THROW(parse_config(j), InputError);
  j = small_rate_config();
  j["p"] = "one";
  EXPECT_THROW(parse_config(j), InputError);
  EXPECT_THROW(parse_config(json::array()), InputError);
}

TEST(Config, HashIgnoresThreads) {
  ExperimentConfig a = parse_config(small_rate_config());
  ExperimentConfig b = a;
  b.threads = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 6;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, ValidateGridAndReplicates) {
  ExperimentConfig c = parse_config(small_rate_config());
  EXPECT_NO_THROW(validate(c, true));
  c.replicates = 19;
  EXPECT_THROW(validate(c, true), InputError);
  EXPECT_NO_THROW(validate(c, false));
  c.n_grid = {64, 128, 128, 256};
  EXPECT_THROW(validate(c, false), InputError);
  c.n_grid = {64, 128, 256};
  EXPECT_THROW(validate(c, false), InputError);
}

TEST(SlopeFit, RecoversExactLine) {
  std::vector<WeightedPoint> pts;
  for (double n : {10.0, 20.0, 40.0, 80.0, 160.0}) {
    pts.push_back({n, 3.0 * std::pow(n, -0.37), 1.0 + n / 100.0});
  }
  const SlopeFit fit = fit_loglog_slope(pts);
  EXPECT_NEAR(fit.slope, -0.37, 1e-12);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(fit.stderr, 0.0, 1e-10);
}

TEST(SlopeFit, KnownWeightedRegression) {
  // Hand computed: log-log points (0,0), (1,1), (2,1), (3,3) with unit
  // weights give slope 0.9 and intercept -0.1 after exponentiation of n.
  std::vector<WeightedPoint> pts;
  const double ys[] = {0.0, 1.0, 1.0, 3.0};
  for (int i = 0; i < 4; ++i) pts.push_back({std::exp(i), std::exp(ys[i]), 1.0});
  const SlopeFit fit = fit_loglog_slope(pts);
  EXPECT_NEAR(fit.slope, 0.9, 1e-12);
  EXPECT_NEAR(fit.intercept, -0.1, 1e-12);
  // Residuals 0.1, 0.2, -0.7, 0.4: RSS = 0.7, sxx = 5.
  EXPECT_NEAR(fit.stderr, std::sqrt(0.7 / 2.0 / 5.0), 1e-12);
}

TEST(SlopeFit, RejectsDegenerateInput) {
  std::vector<WeightedPoint> pts = {{1, 1, 1}, {2, 1, 1}, {4, 0, 1}, {8, 1, 1}};
  EXPECT_THROW(fit_loglog_slope(pts), InputError);
  pts = {{1, 1, 1}, {2, 1, 1}, {2, 1, 1}, {8, 1, 1}};
  EXPECT_THROW(fit_loglog_slope(pts), InputError);
}

TEST(Verdict, BandRule) {
  EXPECT_DOUBLE_EQ(default_band(0.001), 0.05);
  EXPECT_DOUBLE_EQ(default_band(0.1), 0.30000000000000004);
  theory::RatePrediction pred;
  pred.exponent = theory::Rational(-1, 2);
  EXPECT_EQ(verdict(-0.46, pred, 0.05), Verdict::kConsistent);
  EXPECT_EQ(verdict(-0.40, pred, 0.05), Verdict::kInconsistent);
  pred.no_prediction = true;
  EXPECT_EQ(verdict(-0.5, pred, 0.05), Verdict::kInconclusive);
}

TEST(Boundedness, FlagsLateBlowUp) {
  EXPECT_FALSE(boundedness_violation(std::vector<double>{1, 1.2, 0.9, 1.1, 1.0, 1.3, 0.8, 1.1}));
  EXPECT_TRUE(boundedness_violation(std::vector<double>{1, 1.2, 0.9, 1.1, 1.0, 1.3, 0.8, 9.0}));
  EXPECT_FALSE(boundedness_violation(std::vector<double>{1, 100, 1}));
}

TEST(RateRun, SmallUniformMean) {
  const RateReport rep = run_moment_rate(parse_config(small_rate_config()));
  ASSERT_TRUE(rep.fit.has_value());
  EXPECT_EQ(rep.prediction.exponent, theory::Rational(-1, 2));
  EXPECT_NEAR(rep.fit->slope, -0.5, 0.15);
  ASSERT_EQ(rep.per_n.size(), 4u);
  for (const NSummary& s : rep.per_n) {
    EXPECT_EQ(s.failures, 0u);
    EXPECT_LE(s.q05, s.q50);
    EXPECT_LE(s.q50, s.q95);
  }
}

TEST(RateRun, DeterministicAcrossThreadCounts) {
  ExperimentConfig c = parse_config(small_rate_config());
  c.measure = "uniform:d=2";
  c.estimator = Estimator::kTwoSample;
  c.replicates = 20;
  c.threads = 1;
  const json a = strip_runtime(to_json(run_moment_rate(c)));
  c.threads = 3;
  const json b = strip_runtime(to_json(run_moment_rate(c)));
  EXPECT_EQ(a.dump(), b.dump());
  kernels::set_threads(0);
}

TEST(RateRun, RejectsDivergentMoment) {
  json j = small_rate_config();
  j["measure"] = "pareto:beta=1.2";
  j["r"] = 1.5;
  EXPECT_THROW(run_moment_rate(parse_config(j)), Refusal);
}

TEST(RateRun, EstimatorMustFitMeasure) {
  json j = small_rate_config();
  j["measure"] = "uniform:d=2";
  EXPECT_THROW(run_moment_rate(parse_config(j)), InputError);
}

TEST(RateRun, CsvHasOneRowPerReplicate) {
  const RateReport rep = run_moment_rate(parse_config(small_rate_config()));
  const std::string csv = to_csv(rep);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 40);
}

TEST(DeviationRun, UnderpoweredIsRefused) {
  json j = {{"measure", "pareto:beta=1.5"}, {"p", 1},  {"r", 1.2},
            {"statistic", "deviation_prob"},  {"estimator", "exact_1d"},
            {"n_grid", {64, 128, 256, 1 << 20}},
            {"replicates", 20},                {"seed", 3},
            {"x_grid", {1000.0}}};
  EXPECT_THROW(run_deviation_tail(parse_config(j)), Refusal);
}

TEST(DeviationRun, ProducesWilsonCells) {
  json j = {{"measure", "pareto:beta=1.5"}, {"p", 1},  {"r", 1.2},
            {"statistic", "deviation_prob"},  {"estimator", "exact_1d"},
            {"n_grid", {64, 128, 256, 512}},
            {"replicates", 200},               {"seed", 3}};
  const DeviationReport rep = run_deviation_tail(parse_config(j));
  EXPECT_FALSE(rep.x_grid.empty());
  for (const DeviationCell& c : rep.cells) {
    EXPECT_LE(c.wilson_lo, c.probability);
    EXPECT_GE(c.wilson_hi, c.probability);
    EXPECT_EQ(c.trials, 200u);
  }
  EXPECT_EQ(rep.prediction.exponent, theory::Rational(-1, 5));
}

TEST(TrajectoryRun, LilNormalizationBounded) {
  json j = {{"measure", "uniform:d=1"}, {"p", 1}, {"r", 3},
            {"statistic", "lil_rate"},  {"estimator", "exact_1d"},
            {"n_grid", {16, 32, 64, 128, 256, 512, 1024, 2048}},
            {"trajectories", 10},       {"normalization", "lil"},
            {"seed", 4}};
  const TrajectoryReport rep = run_running_max(parse_config(j));
  ASSERT_EQ(rep.trajectories.size(), 10u);
  EXPECT_LE(rep.violations, 1u);
  for (const Trajectory& t : rep.trajectories) {
    for (std::size_t i = 1; i < t.running_max.size(); ++i) {
      EXPECT_GE(t.running_max[i], t.running_max[i - 1]);
    }
  }
}

TEST(TrajectoryRun, LilNeedsLargeCheckpoints) {
  json j = {{"measure", "uniform:d=1"}, {"p", 1}, {"r", 3},
            {"statistic", "lil_rate"},  {"estimator", "exact_1d"},
            {"n_grid", {4, 32, 64, 128}}, {"normalization", "lil"}};
  EXPECT_THROW(run_running_max(parse_config(j)), InputError);
}

}  // namespace
}  // namespace empwass::experiments
