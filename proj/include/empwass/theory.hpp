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

#ifndef EMPWASS_THEORY_HPP_
#define EMPWASS_THEORY_HPP_

#include <boost/rational.hpp>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace empwass::theory {

using Rational = boost::rational<long long>;

// Exact rational for a decimal-like double (denominator <= 10^6); throws
// InputError when no such rational is within 1e-12.
Rational to_rational(double value);
double to_double(const Rational& value);
std::string to_string(const Rational& value);

enum class MomentKind { kWeak, kStrong };
enum class Regime { kSmallDim, kBoundary, kLargeDim };
enum class Statistic {
  kDeviationProb,
  kMean,
  kSecondMoment,
  kRMoment,
  kAsRate,
  kLilRate,
};

std::string to_string(MomentKind kind);
std::string to_string(Regime regime);
std::string to_string(Statistic statistic);
MomentKind parse_moment_kind(const std::string& text);
Statistic parse_statistic(const std::string& text);

struct ProblemParams {
  Rational p{1};
  int d = 1;
  Rational r{2};
  MomentKind moment_kind = MomentKind::kWeak;
  // Whether int t^(p-1) sqrt(H(t)) dt is finite for the measure at hand.
  bool sqrt_tail_integrable = false;
  // Rosenthal gamma correction parameter.
  Rational epsilon{1, 10};
  // Exploratory dimension d' replacing d; predictions made with it are
  // labeled exploratory.
  std::optional<int> dimension_override;
};

// Throws InputError unless p >= 1, d >= 1, r > 1.
void validate(const ProblemParams& params);

// small_dim iff p > d min((r-1)/r, 1/2), boundary at equality.
Regime classify(const ProblemParams& params);

// A term n^exponent (log n)^log_power (loglog n)^loglog_power.
struct Term {
  Rational exponent{0};
  Rational log_power{0};
  Rational loglog_power{0};
  bool operator==(const Term&) const = default;
};

struct RatePrediction {
  Statistic statistic = Statistic::kMean;
  Regime regime = Regime::kSmallDim;
  bool no_prediction = false;
  // Leading term.
  Rational exponent{0};
  Rational log_power{0};
  Rational loglog_power{0};
  Rational x_power{0};
  // All terms of the bound, leading first.
  std::vector<Term> terms;
  std::string source;
  std::string note;
  bool near_boundary = false;
  bool exploratory = false;
};

nlohmann::json to_json(const RatePrediction& prediction);

// Throws InputError for incompatible (statistic, r, moment kind).
RatePrediction moment_rate(const ProblemParams& params, Statistic statistic);

// Decay in n of P(W_p^p > x n^(alpha-1)) at fixed x. Inadmissible alpha or
// an uncovered case gives no_prediction with the reason in note.
RatePrediction moderate_deviation_rate(const ProblemParams& params,
                                       const Rational& alpha);

struct DeviationEnvelope {
  double value = 0.0;
  Regime regime = Regime::kSmallDim;
  std::string source;
  std::string label = "shape only";
};

// Upper envelope of P(W_p^p > x) with every constant set to 1. q defaults
// to r + 1 when r > 2.
DeviationEnvelope deviation_bound(const ProblemParams& params, double n,
                                  double x,
                                  std::optional<double> q = std::nullopt);

struct BaumKatzResult {
  bool admissible = false;
  Rational weight_exponent{0};
  // Admissible alpha interval.
  Rational lo{0};
  Rational hi{1};
  bool lo_closed = false;
  bool has_interval = false;
  std::string source;
  std::string reason;
};

BaumKatzResult baum_katz_weights(const ProblemParams& params,
                                 const Rational& alpha);

// Exponent table over a fixed parameter grid.
nlohmann::json export_table();

}  // namespace empwass::theory

#endif  // EMPWASS_THEORY_HPP_
