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

#ifndef EMPWASS_EXPERIMENTS_HPP_
#define EMPWASS_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "empwass/measures.hpp"
#include "empwass/theory.hpp"
#include "empwass/transport.hpp"

namespace empwass::experiments {

enum class Estimator { kSemidiscrete, kTwoSample, kExact1d };
enum class Verdict { kConsistent, kInconsistent, kInconclusive };
enum class Normalization { kAuto, kLil, kAsRate, kNone };

std::string to_string(Estimator estimator);
std::string to_string(Verdict verdict);
std::string to_string(Normalization normalization);

struct ExperimentConfig {
  std::string measure;
  double p = 1.0;
  double r = 2.0;
  theory::MomentKind moment_kind = theory::MomentKind::kWeak;
  theory::Statistic statistic = theory::Statistic::kMean;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 20;
  Estimator estimator = Estimator::kExact1d;
  SolverOptions solver;
  std::uint64_t seed = 1;
  // Reference draws per sample point for the semidiscrete estimator.
  std::size_t oversample = 4;
  // Deviation runs. Empty x_grid selects the default quantile grid.
  std::vector<double> x_grid;
  std::optional<double> alpha;
  // Trajectory runs.
  Normalization normalization = Normalization::kAuto;
  std::size_t trajectories = 20;
  int threads = 0;
  // Fixed verdict band; default max(0.05, 3 stderr).
  std::optional<double> band;
  std::size_t bootstrap = 200;
  double epsilon = 0.1;
};

// Unknown or duplicate keys and out-of-range values raise InputError.
ExperimentConfig parse_config(const nlohmann::json& json);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);
// FNV-1a over the canonical JSON form.
std::uint64_t config_hash(const ExperimentConfig& config);

// Checks n_grid (strictly increasing, length >= 4) and K (>= 20 for slope
// runs).
void validate(const ExperimentConfig& config, bool slope_run);

struct WeightedPoint {
  double n = 0.0;
  double value = 0.0;
  double weight = 1.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Weighted least squares of log value on log n.
SlopeFit fit_loglog_slope(std::span<const WeightedPoint> points);

double default_band(double stderr);

Verdict verdict(double slope, const theory::RatePrediction& prediction,
                double band);

// Problem parameters for a config, with the square-root tail flag taken
// from the measure.
theory::ProblemParams problem_params(const ExperimentConfig& config,
                                     const AnalyticMeasure& measure);

struct NSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double r_moment = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  // The statistic the slope is fitted on, with its standard error.
  double statistic = 0.0;
  double statistic_stderr = 0.0;
  std::size_t failures = 0;
  std::string error;
  double seconds = 0.0;  // runtime metadata
};

struct RateReport {
  ExperimentConfig config;
  std::uint64_t hash = 0;
  std::vector<NSummary> per_n;
  // values[i * K + j]: replicate j at n_grid[i]; NaN when the solver failed.
  std::vector<double> values;
  std::optional<SlopeFit> fit;
  theory::RatePrediction prediction;
  double band = 0.0;
  Verdict verdict = Verdict::kInconclusive;
  std::string reason;
  double wall_seconds = 0.0;
  int threads = 1;
};

RateReport run_moment_rate(const ExperimentConfig& config);

struct DeviationCell {
  std::size_t n = 0;
  double x = 0.0;
  double threshold = 0.0;  // x n^(alpha - 1)
  std::size_t exceedances = 0;
  std::size_t trials = 0;
  double probability = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  bool used = false;  // at least 10 exceedances
};

struct DeviationFit {
  double x = 0.0;
  std::optional<SlopeFit> fit;
  Verdict verdict = Verdict::kInconclusive;
  double band = 0.0;
  std::string reason;
};

struct DeviationReport {
  ExperimentConfig config;
  std::uint64_t hash = 0;
  double alpha = 1.0;
  std::vector<double> x_grid;
  std::vector<DeviationCell> cells;
  std::vector<DeviationFit> fits;
  // Median over n of the fitted log-probability slope in log x.
  std::optional<double> x_slope;
  theory::RatePrediction prediction;
  Verdict verdict = Verdict::kInconclusive;
  std::vector<double> values;
  double wall_seconds = 0.0;
  int threads = 1;
};

// Throws Refusal with the minimal K when the expected exceedance count at
// the largest n, extrapolated from the smallest n along the predicted
// decay, is below 10 for every x.
DeviationReport run_deviation_tail(const ExperimentConfig& config);

struct Trajectory {
  std::vector<std::size_t> checkpoints;
  std::vector<double> values;         // W_p^p(mu_k, mu)
  std::vector<double> normalized;
  std::vector<double> running_max;    // max over checkpoints j <= k of j W_j
  bool violation = false;
};

struct TrajectoryReport {
  ExperimentConfig config;
  std::uint64_t hash = 0;
  Normalization normalization = Normalization::kNone;
  std::string normalization_formula;
  std::vector<Trajectory> trajectories;
  std::size_t violations = 0;
  std::optional<theory::RatePrediction> prediction;
  double wall_seconds = 0.0;
  int threads = 1;
};

// Flags a violation when a value in the final quarter exceeds 3 times the
// median of the middle half.
bool boundedness_violation(std::span<const double> normalized);

TrajectoryReport run_running_max(const ExperimentConfig& config);

// Reports as JSON; runtime metadata sits under the "runtime" key.
nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const DeviationReport& report);
nlohmann::json to_json(const TrajectoryReport& report);
// Drops the "runtime" key, for determinism comparisons.
nlohmann::json strip_runtime(nlohmann::json report);

// Flat `n,replicate,value` rows.
std::string to_csv(const RateReport& report);
std::string to_csv(const DeviationReport& report);
// `trajectory,n,value,normalized` rows.
std::string to_csv(const TrajectoryReport& report);

}  // namespace empwass::experiments

#endif  // EMPWASS_EXPERIMENTS_HPP_
