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

#include "empwass/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "empwass/errors.hpp"

namespace empwass::theory {

namespace {

using R = Rational;

Regime compare(const R& p, const R& threshold) {
  if (p > threshold) return Regime::kSmallDim;
  if (p == threshold) return Regime::kBoundary;
  return Regime::kLargeDim;
}

R dimension(const ProblemParams& params) {
  return R(params.dimension_override.value_or(params.d));
}

R max(const R& a, const R& b) { return a < b ? b : a; }

void order_terms(std::vector<Term>& terms) {
  std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    if (a.exponent != b.exponent) return a.exponent > b.exponent;
    return a.log_power > b.log_power;
  });
}

RatePrediction make(Statistic statistic, Regime regime, std::vector<Term> terms,
                    std::string source) {
  RatePrediction out;
  out.statistic = statistic;
  out.regime = regime;
  order_terms(terms);
  out.terms = std::move(terms);
  out.exponent = out.terms.front().exponent;
  out.log_power = out.terms.front().log_power;
  out.loglog_power = out.terms.front().loglog_power;
  out.source = std::move(source);
  return out;
}

RatePrediction none(Statistic statistic, Regime regime, std::string source,
                    std::string note) {
  RatePrediction out;
  out.statistic = statistic;
  out.regime = regime;
  out.no_prediction = true;
  out.source = std::move(source);
  out.note = std::move(note);
  return out;
}

void mark_near_boundary(RatePrediction& out, const R& p, const R& threshold) {
  const double gap = std::abs(to_double(p - threshold));
  if (p != threshold && gap < 0.02 * to_double(p)) {
    out.near_boundary = true;
    const std::string warning = "near boundary p = " + to_string(threshold) +
                                "; finite-n slopes may mix regimes";
    out.note = out.note.empty() ? warning : out.note + "; " + warning;
  }
}

void require_strong(const ProblemParams& params, Statistic statistic) {
  if (params.moment_kind != MomentKind::kStrong) {
    throw InputError(to_string(statistic) + " requires a strong moment of order rp");
  }
}

void require_sqrt_tail(const ProblemParams& params, Statistic statistic) {
  if (!params.sqrt_tail_integrable) {
    throw InputError(to_string(statistic) +
                     " requires int t^(p-1) sqrt(H(t)) dt < infinity");
  }
}

RatePrediction rate_impl(const ProblemParams& params, Statistic statistic) {
  const R p = params.p;
  const R r = params.r;
  const R d = dimension(params);
  const R half = d / 2;
  const R vbe = d * (r - 1) / r;
  const R one(1);
  const R two(2);

  switch (statistic) {
    case Statistic::kMean: {
      if (params.sqrt_tail_integrable) {
        const Regime g = compare(p, half);
        std::vector<Term> t;
        if (g == Regime::kSmallDim) t = {{R(-1, 2)}};
        if (g == Regime::kBoundary) t = {{R(-1, 2), one}};
        if (g == Regime::kLargeDim) t = {{-p / d}};
        auto out = make(statistic, g, t, "Theorem 5.3");
        out.note = "square root of the second-moment bound";
        mark_near_boundary(out, p, half);
        return out;
      }
      if (r < two) {
        const Regime g = compare(p, vbe);
        std::vector<Term> t;
        if (g == Regime::kSmallDim) t = {{-(r - 1) / r}};
        if (g == Regime::kBoundary) t = {{-p / d, two}};
        if (g == Regime::kLargeDim) t = {{-p / d}};
        auto out = make(statistic, g, t, "Theorem 5.1");
        mark_near_boundary(out, p, vbe);
        return out;
      }
      const Regime g = compare(p, half);
      std::vector<Term> t;
      if (g == Regime::kSmallDim) t = {{R(-1, 2), one}};
      if (g == Regime::kBoundary) t = {{R(-1, 2), two}};
      if (g == Regime::kLargeDim) t = {{-p / d}};
      auto out = make(statistic, g, t, "Theorem 5.1");
      out.note = "weak moment of order 2p";
      mark_near_boundary(out, p, half);
      return out;
    }
    case Statistic::kSecondMoment: {
      require_sqrt_tail(params, statistic);
      const Regime g = compare(p, half);
      std::vector<Term> t;
      if (g == Regime::kSmallDim) t = {{R(-1)}};
      if (g == Regime::kBoundary) t = {{R(-1), two}};
      if (g == Regime::kLargeDim) t = {{-2 * p / d}};
      auto out = make(statistic, g, t, "Theorem 5.3");
      mark_near_boundary(out, p, half);
      return out;
    }
    case Statistic::kRMoment: {
      require_strong(params, statistic);
      if (r == two) {
        throw InputError("r_moment is stated for r in (1,2) and r > 2, not r = 2");
      }
      if (r < two) {
        const Regime g = compare(p, vbe);
        std::vector<Term> t;
        std::string source = "Theorem 5.4";
        if (g == Regime::kSmallDim) t = {{-(r - 1)}};
        if (g == Regime::kBoundary) {
          t = {{-(r - 1), r}};
          source = "Theorem 5.4 Remark";
        }
        if (g == Regime::kLargeDim) t = {{-r * p / d}};
        auto out = make(statistic, g, t, source);
        mark_near_boundary(out, p, vbe);
        return out;
      }
      std::vector<Term> t;
      Regime g = Regime::kSmallDim;
      if (p > vbe) {
        t = {{-r / 2}, {-(r - 1)}};
      } else if (p > half) {
        const R eps = params.epsilon;
        const R gamma = eps * (2 * p - d) / (d * (r - 2 + eps));
        t = {{-r / 2}, {gamma - p * r / d}};
      } else if (p == half) {
        g = Regime::kBoundary;
        t = {{-r / 2, r}, {-r / 2, two}};
      } else {
        g = Regime::kLargeDim;
        t = {{-r * p / d}};
      }
      auto out = make(statistic, g, t, "Theorem 5.6");
      mark_near_boundary(out, p, half);
      return out;
    }
    case Statistic::kAsRate: {
      require_strong(params, statistic);
      if (!(r < two)) throw InputError("as_rate is stated for r in (1,2)");
      const Regime g = compare(p, vbe);
      if (g == Regime::kBoundary) {
        return none(statistic, g, "Corollary 4.1",
                    "no prediction at p = d(r-1)/r");
      }
      std::vector<Term> t;
      if (g == Regime::kSmallDim) t = {{-(r - 1) / r}};
      if (g == Regime::kLargeDim) t = {{-p / d, one / r}};
      auto out = make(statistic, g, t, "Corollary 4.1");
      mark_near_boundary(out, p, vbe);
      return out;
    }
    case Statistic::kLilRate: {
      require_sqrt_tail(params, statistic);
      const Regime g = compare(p, half);
      if (g == Regime::kBoundary) {
        return none(statistic, g, "Theorem 4.2", "no prediction at p = d/2");
      }
      std::vector<Term> t;
      if (g == Regime::kSmallDim) t = {{R(-1, 2), R(0), R(1, 2)}};
      if (g == Regime::kLargeDim) t = {{-p / d, R(0), p / d}};
      auto out = make(statistic, g, t, "Theorem 4.2");
      mark_near_boundary(out, p, half);
      return out;
    }
    case Statistic::kDeviationProb: {
      if (r == two) {
        throw InputError("deviation_prob is stated for r in (1,2) and r > 2, not r = 2");
      }
      if (r < two) {
        const Regime g = compare(p, vbe);
        std::vector<Term> t;
        if (g == Regime::kSmallDim) t = {{-(r - 1)}};
        if (g == Regime::kBoundary) t = {{-(r - 1), 2 * r}};
        if (g == Regime::kLargeDim) t = {{-r * p / d}};
        auto out = make(statistic, g, t, "Theorem 2.1");
        out.x_power = -r;
        if (g == Regime::kBoundary) {
          out.note = "fixed x, n large: log_+ factor grows like log n";
        }
        mark_near_boundary(out, p, vbe);
        return out;
      }
      const R q = r + 1;
      const Regime g = compare(p, half);
      auto out = make(statistic, g, {{-(r - 1)}, {-q / 2}}, "Theorem 2.3");
      out.x_power = out.exponent == -(r - 1) ? -r : -q;
      out.note = "q = r + 1; exponential term omitted";
      mark_near_boundary(out, p, half);
      return out;
    }
  }
  throw InputError("unknown statistic");
}

}  // namespace

Rational to_rational(double value) {
  if (!std::isfinite(value)) throw InputError("non-finite parameter");
  const bool negative = value < 0.0;
  const double v = std::abs(value);
  // Continued-fraction convergents.
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = v;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    if (a > 1e12) break;
    const long long ai = static_cast<long long>(a);
    const long long h2 = ai * h1 + h0;
    const long long k2 = ai * k1 + k0;
    if (k2 > 1000000) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - v) <=
        1e-12 * std::max(1.0, v)) {
      const R out(h1, k1);
      return negative ? -out : out;
    }
    const double frac = x - a;
    if (frac <= 0.0) break;
    x = 1.0 / frac;
  }
  throw InputError("parameter " + std::to_string(value) +
                   " has no small exact rational form");
}

double to_double(const Rational& value) {
  return static_cast<double>(value.numerator()) /
         static_cast<double>(value.denominator());
}

std::string to_string(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" +
         std::to_string(value.denominator());
}

std::string to_string(MomentKind kind) {
  return kind == MomentKind::kWeak ? "weak" : "strong";
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::kSmallDim: return "small_dim";
    case Regime::kBoundary: return "boundary";
    case Regime::kLargeDim: return "large_dim";
  }
  return "?";
}

std::string to_string(Statistic statistic) {
  switch (statistic) {
    case Statistic::kDeviationProb: return "deviation_prob";
    case Statistic::kMean: return "mean";
    case Statistic::kSecondMoment: return "second_moment";
    case Statistic::kRMoment: return "r_moment";
    case Statistic::kAsRate: return "as_rate";
    case Statistic::kLilRate: return "lil_rate";
  }
  return "?";
}

MomentKind parse_moment_kind(const std::string& text) {
  if (text == "weak") return MomentKind::kWeak;
  if (text == "strong") return MomentKind::kStrong;
  throw InputError("unknown moment kind '" + text + "'");
}

Statistic parse_statistic(const std::string& text) {
  for (Statistic s : {Statistic::kDeviationProb, Statistic::kMean,
                      Statistic::kSecondMoment, Statistic::kRMoment,
                      Statistic::kAsRate, Statistic::kLilRate}) {
    if (to_string(s) == text) return s;
  }
  throw InputError("unknown statistic '" + text + "'");
}

void validate(const ProblemParams& params) {
  if (params.p < R(1)) throw InputError("p must be >= 1");
  if (params.d < 1) throw InputError("d must be >= 1");
  if (params.r <= R(1)) throw InputError("r must be > 1");
  if (params.epsilon <= R(0)) throw InputError("epsilon must be > 0");
  if (params.dimension_override && *params.dimension_override < 1) {
    throw InputError("dimension override must be >= 1");
  }
}

Regime classify(const ProblemParams& params) {
  validate(params);
  const R d = dimension(params);
  const R r = params.r;
  const R factor = std::min((r - 1) / r, R(1, 2));
  return compare(params.p, d * factor);
}

nlohmann::json to_json(const RatePrediction& prediction) {
  nlohmann::json terms = nlohmann::json::array();
  for (const Term& t : prediction.terms) {
    terms.push_back({{"exponent", to_string(t.exponent)},
                     {"log_power", to_string(t.log_power)},
                     {"loglog_power", to_string(t.loglog_power)}});
  }
  return {{"statistic", to_string(prediction.statistic)},
          {"regime", to_string(prediction.regime)},
          {"no_prediction", prediction.no_prediction},
          {"exponent", to_string(prediction.exponent)},
          {"log_power", to_string(prediction.log_power)},
          {"loglog_power", to_string(prediction.loglog_power)},
          {"x_power", to_string(prediction.x_power)},
          {"terms", terms},
          {"source", prediction.source},
          {"note", prediction.note},
          {"near_boundary", prediction.near_boundary},
          {"exploratory", prediction.exploratory},
          {"label", "shape only"}};
}

RatePrediction moment_rate(const ProblemParams& params, Statistic statistic) {
  validate(params);
  RatePrediction out = rate_impl(params, statistic);
  if (params.dimension_override) {
    out.exploratory = true;
    out.note += out.note.empty() ? "" : "; ";
    out.note += "dimension override d' = " +
                std::to_string(*params.dimension_override) +
                ", exploratory only";
  }
  return out;
}

RatePrediction moderate_deviation_rate(const ProblemParams& params,
                                       const Rational& alpha) {
  validate(params);
  const R p = params.p;
  const R r = params.r;
  const R d = dimension(params);
  const R one(1);
  const R two(2);
  const Statistic s = Statistic::kDeviationProb;
  if (alpha <= R(0) || alpha > one) {
    return none(s, classify(params), "Corollary 3.1",
                "alpha must lie in (0, 1]");
  }
  if (r == two) {
    return none(s, classify(params), "Corollary 3.1",
                "no moderate deviation statement at r = 2");
  }
  if (r > two) {
    const R lo = max(R(1, 2), (d - p) / d);
    const Regime g = compare(p, d / 2);
    if (!(alpha > lo)) {
      return none(s, g, "Corollary 3.2",
                  "alpha outside (" + to_string(lo) + ", 1]");
    }
    auto out = make(s, g, {{-(alpha * r - 1)}}, "Corollary 3.2");
    out.x_power = -r;
    return out;
  }
  const R vbe = d * (r - 1) / r;
  const Regime g = compare(p, vbe);
  RatePrediction out;
  if (g == Regime::kSmallDim) {
    if (alpha < one / r) {
      return none(s, g, "Corollary 3.1", "alpha outside [" + to_string(one / r) + ", 1]");
    }
    out = make(s, g, {{-(alpha * r - 1)}}, "Corollary 3.1");
  } else if (g == Regime::kBoundary) {
    if (!(alpha > one / r)) {
      return none(s, g, "Corollary 3.1", "alpha outside (" + to_string(one / r) + ", 1]");
    }
    out = make(s, g, {{-(alpha * r - 1), 2 * r}}, "Corollary 3.1");
  } else {
    const R lo = (d - p) / d;
    if (alpha < lo) {
      return none(s, g, "Corollary 3.1", "alpha outside [" + to_string(lo) + ", 1]");
    }
    out = make(s, g, {{-(p * r - (1 - alpha) * r * d) / d}}, "Corollary 3.1");
  }
  out.x_power = -r;
  mark_near_boundary(out, p, vbe);
  return out;
}

DeviationEnvelope deviation_bound(const ProblemParams& params, double n,
                                  double x, std::optional<double> q) {
  validate(params);
  if (!(n >= 1.0)) throw InputError("n must be >= 1");
  if (!(x > 0.0)) throw InputError("x must be > 0");
  const double p = to_double(params.p);
  const double r = to_double(params.r);
  const double d = to_double(dimension(params));
  DeviationEnvelope out;
  if (params.r == R(2)) {
    throw InputError("deviation envelope is stated for r in (1,2) and r > 2");
  }
  if (params.r < R(2)) {
    const R vbe = dimension(params) * (params.r - 1) / params.r;
    out.regime = compare(params.p, vbe);
    out.source = "Theorem 2.1";
    const double base = std::pow(x, -r);
    switch (out.regime) {
      case Regime::kSmallDim:
        out.value = base * std::pow(n, -(r - 1.0));
        break;
      case Regime::kBoundary: {
        const double z = std::pow(x, 1.0 / p) * std::pow(n, r / (d * r - d));
        const double logp = std::max(0.0, std::log(z));
        out.value = base * std::pow(std::log(n), r) * std::pow(n, -(r - 1.0)) *
                    std::pow(1.0 + logp, r);
        break;
      }
      case Regime::kLargeDim:
        out.value = base * std::pow(n, -r * p / d);
        break;
    }
    return out;
  }
  const double qq = q.value_or(r + 1.0);
  if (!(qq > r)) throw InputError("q must exceed r");
  out.regime = compare(params.p, dimension(params) / 2);
  out.source = "Theorem 2.3";
  double a = 0.0;
  if (x <= 1.0) {
    switch (out.regime) {
      case Regime::kSmallDim:
        a = std::exp(-n * x * x);
        break;
      case Regime::kBoundary: {
        const double y = x / std::log(2.0 + 1.0 / x);
        a = std::exp(-n * y * y);
        break;
      }
      case Regime::kLargeDim:
        a = std::exp(-n * std::pow(x, d / p));
        break;
    }
  }
  out.value = a + std::pow(x, -r) * std::pow(n, -(r - 1.0)) +
              std::pow(x, -qq) * std::pow(n, -qq / 2.0);
  return out;
}

BaumKatzResult baum_katz_weights(const ProblemParams& params,
                                 const Rational& alpha) {
  validate(params);
  const R p = params.p;
  const R r = params.r;
  const R d = dimension(params);
  const R one(1);
  BaumKatzResult out;
  if (r == R(2)) {
    out.source = "Theorem 3.2";
    out.reason = "no Baum-Katz statement at r = 2";
    return out;
  }
  if (r > R(2)) {
    out.source = "Theorem 3.3";
    out.lo = max(R(1, 2), (d - p) / d);
    out.lo_closed = false;
    out.has_interval = true;
    out.weight_exponent = alpha * r - 2;
  } else {
    out.source = "Theorem 3.2";
    const Regime g = compare(p, d * (r - 1) / r);
    if (g == Regime::kBoundary) {
      out.reason = "no prediction at p = d(r-1)/r";
      return out;
    }
    out.has_interval = true;
    if (g == Regime::kSmallDim) {
      out.lo = one / r;
      out.lo_closed = true;
      out.weight_exponent = alpha * r - 2;
    } else {
      out.lo = (d - p) / d;
      out.lo_closed = false;
      out.weight_exponent = (p * r - (1 - alpha) * r * d - d) / d;
    }
  }
  const bool above = out.lo_closed ? alpha >= out.lo : alpha > out.lo;
  out.admissible = above && alpha <= one;
  if (!out.admissible) {
    out.weight_exponent = R(0);
    out.reason = "alpha outside " + std::string(out.lo_closed ? "[" : "(") +
                 to_string(out.lo) + ", 1]";
  }
  return out;
}

nlohmann::json export_table() {
  nlohmann::json rows = nlohmann::json::array();
  const std::vector<R> ps = {R(1), R(3, 2), R(2)};
  const std::vector<R> rs = {R(3, 2), R(3)};
  const std::vector<Statistic> stats = {
      Statistic::kDeviationProb, Statistic::kMean, Statistic::kSecondMoment,
      Statistic::kRMoment, Statistic::kAsRate, Statistic::kLilRate};
  for (const R& p : ps) {
    for (int d = 1; d <= 4; ++d) {
      for (const R& r : rs) {
        ProblemParams params;
        params.p = p;
        params.d = d;
        params.r = r;
        params.moment_kind = MomentKind::kStrong;
        params.sqrt_tail_integrable = r > R(2);
        for (Statistic s : stats) {
          nlohmann::json row = {{"p", to_string(p)},
                                {"d", d},
                                {"r", to_string(r)},
                                {"sqrt_tail_integrable", params.sqrt_tail_integrable},
                                {"classify", to_string(classify(params))}};
          try {
            row["prediction"] = to_json(moment_rate(params, s));
          } catch (const InputError& e) {
            row["statistic"] = to_string(s);
            row["error"] = e.what();
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

}  // namespace empwass::theory
