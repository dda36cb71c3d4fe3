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

#include "empwass/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "empwass/errors.hpp"
#include "empwass/experiments.hpp"
#include "empwass/kernels.hpp"
#include "empwass/measures.hpp"
#include "empwass/multiscale.hpp"
#include "empwass/rng.hpp"
#include "empwass/theory.hpp"
#include "empwass/transport.hpp"

namespace empwass::verify {

namespace {

using theory::Rational;

struct Context {
  const VerifyOptions& options;
  MultiscaleOptions multiscale() const {
    MultiscaleOptions out;
    if (options.fault == Fault::kCellBoundary) {
      out.convention = CellConvention::kLowerClosed;
    }
    return out;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

void add(GroupResult& g, std::string name, const std::function<std::string()>& body) {
  Check check;
  check.name = std::move(name);
  try {
    check.detail = body();
    check.passed = check.detail.empty();
  } catch (const std::exception& e) {
    check.detail = std::string("exception: ") + e.what();
  }
  if (check.passed) check.detail = "ok";
  g.checks.push_back(std::move(check));
}

EmpiricalMeasure gaussian_points(Stream& s, std::size_t n, std::size_t d,
                                 double scale = 1.0) {
  std::vector<double> c(n * d);
  for (double& v : c) v = scale * s.normal();
  return EmpiricalMeasure(d, std::move(c));
}

EmpiricalMeasure mixed_points(Stream& s, std::size_t n) {
  std::vector<double> c(n);
  for (double& v : c) {
    v = s.uniform() < 0.5 ? s.normal() : s.sign() * std::pow(s.uniform_open_low(), -1.0 / 1.5);
  }
  return EmpiricalMeasure(1, std::move(c));
}

GroupResult measures_group(const Context& ctx) {
  GroupResult g{"measures", {}};
  add(g, "closed forms match quadrature", [] {
    struct Case {
      const char* spec;
      double q;
    };
    for (const Case& c : {Case{"uniform:d=2", 1.5}, Case{"uniform_sym:d=3", 2.0},
                          Case{"pareto:beta=3", 1.5}, Case{"pareto_prod:beta=4,d=2", 2.0}}) {
      const MeasurePtr mu = parse_measure(c.spec);
      const double a = *mu->closed_strong_moment(c.q);
      const double b = quadrature::strong_moment(*mu, c.q);
      if (rel_diff(a, b) > 1e-6) {
        return std::string(c.spec) + " strong moment " + fmt(a) + " vs " + fmt(b);
      }
      if (auto s = mu->closed_sqrt_tail_integral(1.0)) {
        const double t = quadrature::sqrt_tail_integral(*mu, 1.0);
        if (rel_diff(*s, t) > 1e-6) {
          return std::string(c.spec) + " sqrt-tail integral " + fmt(*s) + " vs " + fmt(t);
        }
      }
    }
    return std::string();
  });
  add(g, "block masses sum to one", [] {
    for (const char* spec : {"uniform:d=2", "uniform_sym:d=1", "pareto:beta=1.5",
                             "pareto_prod:beta=3,d=2", "dirac:at=0.25,d=3"}) {
      const MeasurePtr mu = parse_measure(spec);
      double total = 0.0;
      for (int m = 0; m <= 60; ++m) total += block_mass(*mu, m);
      if (std::abs(total - 1.0) > 1e-9) return std::string(spec) + " total " + fmt(total);
    }
    return std::string();
  });
  add(g, "tail envelope dominates H", [] {
    for (const char* spec : {"uniform:d=2", "pareto:beta=1.5", "pareto_prod:beta=3,d=2"}) {
      const MeasurePtr mu = parse_measure(spec);
      const TailEnvelope env = mu->tail_envelope();
      for (double t = std::max(env.from, 1e-3); t < 1e6; t *= 1.7) {
        if (std::isfinite(env.exponent) &&
            mu->tail(t) > env.constant * std::pow(t, -env.exponent) * (1 + 1e-12)) {
          return std::string(spec) + " at t = " + fmt(t);
        }
      }
    }
    return std::string();
  });
  add(g, "seeded draws reproducible", [&] {
    const MeasurePtr mu = parse_measure("pareto_prod:beta=2,d=2");
    const auto a = sample(*mu, 100, ctx.options.seed, 3);
    const auto b = sample(*mu, 100, ctx.options.seed, 3);
    const auto c = sample(*mu, 100, ctx.options.seed, 4);
    if (!std::equal(a.coords().begin(), a.coords().end(), b.coords().begin())) {
      return std::string("same stream differs");
    }
    if (std::equal(a.coords().begin(), a.coords().end(), c.coords().begin())) {
      return std::string("distinct streams coincide");
    }
    return std::string();
  });
  add(g, "empirical tail tracks H", [&] {
    const std::size_t n = 20000;
    for (const char* spec : {"uniform_sym:d=2", "pareto:beta=1.5"}) {
      const MeasurePtr mu = parse_measure(spec);
      const auto x = sample(*mu, n, ctx.options.seed, 9);
      for (double t : {0.3, 0.7, 1.5, 4.0}) {
        const double h = mu->tail(t);
        const double e = empirical_tail(x, t);
        const double tol = 5.0 * std::sqrt(h * (1 - h) / n) + 1e-9;
        if (std::abs(h - e) > tol) {
          return std::string(spec) + " t = " + fmt(t) + ": " + fmt(e) + " vs " + fmt(h);
        }
      }
    }
    return std::string();
  });
  return g;
}

GroupResult transport_group(const Context& ctx) {
  GroupResult g{"transport", {}};
  Stream s(ctx.options.seed, 101);
  add(g, "assignment equals 1-D sweep", [&] {
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 1 + s.below(32);
      const auto x = mixed_points(s, n);
      const auto y = mixed_points(s, n);
      for (double p : {1.0, 2.0}) {
        const double a = wasserstein_assignment(x, y, p).value;
        const double b = wasserstein_1d(x, y, p).value;
        if (rel_diff(a, b) > 1e-10) return "instance " + std::to_string(t) + ": " + fmt(a) + " vs " + fmt(b);
      }
    }
    return std::string();
  });
  add(g, "symmetry and identity", [&] {
    const auto x = gaussian_points(s, 40, 2);
    const auto y = gaussian_points(s, 40, 2);
    const double xy = wasserstein(x, y, 2.0).value;
    const double yx = wasserstein(y, x, 2.0).value;
    const double xx = wasserstein(x, x, 2.0).value;
    if (rel_diff(xy, yx) > 1e-12) return "asymmetric: " + fmt(xy) + " vs " + fmt(yx);
    if (xx != 0.0) return "self distance " + fmt(xx);
    return std::string();
  });
  add(g, "triangle inequality for W_1", [&] {
    for (int t = 0; t < 10; ++t) {
      const auto x = gaussian_points(s, 24, 2);
      const auto y = gaussian_points(s, 24, 2, 2.0);
      const auto z = gaussian_points(s, 24, 2, 0.5);
      const double xy = wasserstein(x, y, 1.0).value;
      const double yz = wasserstein(y, z, 1.0).value;
      const double xz = wasserstein(x, z, 1.0).value;
      if (xz > xy + yz + 1e-12) return "violated at instance " + std::to_string(t);
    }
    return std::string();
  });
  add(g, "plans have the prescribed marginals", [&] {
    const auto x = gaussian_points(s, 30, 2);
    const auto y = gaussian_points(s, 30, 2);
    const auto exact = wasserstein(x, y, 1.0);
    if (plan_marginal_violation(x, y, exact.plan) > 1e-12) return std::string("assignment plan");
    if (rel_diff(plan_cost(x, y, 1.0, exact.plan), exact.value) > 1e-12) {
      return std::string("assignment plan cost");
    }
    const auto x1 = mixed_points(s, 17);
    const auto y1 = mixed_points(s, 11);
    const auto sweep = wasserstein_1d(x1, y1, 1.0);
    if (plan_marginal_violation(x1, y1, sweep.plan) > 1e-12) return std::string("1-D plan");
    const double eps = 0.05 * median_pairwise_cost(x, y, 1.0);
    const auto ent = wasserstein_entropic(x, y, 1.0, eps, 2000);
    if (plan_marginal_violation(x, y, ent.plan) > 1e-9) return std::string("entropic plan");
    return std::string();
  });
  add(g, "rounded entropic cost bounds the optimum", [&] {
    const auto x = gaussian_points(s, 60, 3);
    const auto y = gaussian_points(s, 60, 3);
    const double exact = wasserstein_assignment(x, y, 1.0).value;
    const double eps = 0.05 * median_pairwise_cost(x, y, 1.0);
    const double ent = wasserstein_entropic(x, y, 1.0, eps, 2000).value;
    if (ent < exact - 1e-9) return "entropic " + fmt(ent) + " below exact " + fmt(exact);
    return std::string();
  });
  add(g, "serial and OpenMP kernels agree", [&] {
    const auto x = gaussian_points(s, 50, 3);
    const auto y = gaussian_points(s, 70, 3);
    std::vector<double> a(50 * 70), b(50 * 70);
    kernels::cost_matrix(x, y, 1.5, a, kernels::Backend::kSerial);
    kernels::cost_matrix(x, y, 1.5, b, kernels::Backend::kOpenMP);
    if (a != b) return std::string("cost_matrix");
    std::vector<double> pot(70), ra(50), rb(50);
    for (double& v : pot) v = s.normal();
    const auto view = kernels::CostView::dense(a, 50, 70);
    kernels::soft_min_rows(view, pot, 0.1, ra, kernels::Backend::kSerial);
    kernels::soft_min_rows(view, pot, 0.1, rb, kernels::Backend::kOpenMP);
    if (ra != rb) return std::string("soft_min_rows");
    std::vector<int> ba(50), bb(50);
    std::vector<std::uint32_t> ca(150), cb(150);
    kernels::dyadic_locate(x, 6, ba, ca, CellConvention::kUpperClosed, kernels::Backend::kSerial);
    kernels::dyadic_locate(x, 6, bb, cb, CellConvention::kUpperClosed, kernels::Backend::kOpenMP);
    if (ba != bb || ca != cb) return std::string("dyadic_locate");
    return std::string();
  });
  add(g, "dual bound below W_1", [&] {
    for (const char* spec : {"uniform:d=1", "pareto:beta=3"}) {
      const MeasurePtr mu = parse_measure(spec);
      for (int t = 0; t < 5; ++t) {
        const auto x = sample(*mu, 200, ctx.options.seed, 200 + t);
        const double lower = dual_lipschitz_lower_bound(x, *mu);
        const double w = wasserstein_1d_quantile(x, *mu, 1.0);
        if (lower > w + 1e-9) return std::string(spec) + ": " + fmt(lower) + " > " + fmt(w);
      }
    }
    return std::string();
  });
  return g;
}

struct Instance {
  MeasurePtr mu;
  EmpiricalMeasure x;
  double p;
};

std::vector<Instance> multiscale_instances(std::uint64_t seed, std::size_t count) {
  const std::vector<std::string> specs = {
      "uniform:d=1", "uniform_sym:d=2", "uniform:d=3", "pareto:beta=1.5",
      "pareto_prod:beta=3,d=2", "uniform_sym:d=1", "pareto_prod:beta=2,d=3"};
  Stream s(seed, 303);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    MeasurePtr mu = parse_measure(specs[i % specs.size()]);
    const std::size_t n = 8 + s.below(200);
    out.push_back({mu, sample(*mu, n, seed, 400 + i), i % 2 == 0 ? 1.0 : 2.0});
  }
  return out;
}

GroupResult multiscale_group(const Context& ctx) {
  GroupResult g{"multiscale", {}};
  const auto instances = multiscale_instances(ctx.options.seed, 14);
  const auto opts = ctx.multiscale();
  add(g, "partition of unity", [&] {
    for (const Instance& in : instances) {
      const auto prof = delta_p(in.x, *in.mu, in.p, 8, default_l_max(in.x.dim()),
                                std::nullopt, opts);
      for (const BlockTerms& b : prof.per_block) {
        for (std::size_t c : b.cell_counts) {
          if (c != b.sample_count) return in.mu->spec() + " block " + std::to_string(b.m);
        }
      }
    }
    return std::string();
  });
  add(g, "refinement monotonicity", [&] {
    for (const Instance& in : instances) {
      const auto prof = delta_p(in.x, *in.mu, in.p, 8, default_l_max(in.x.dim()),
                                std::nullopt, opts);
      for (const BlockTerms& b : prof.per_block) {
        for (std::size_t l = 1; l < b.cell_discrepancy.size(); ++l) {
          if (b.cell_discrepancy[l] < b.cell_discrepancy[l - 1] - 1e-12) {
            return in.mu->spec() + " block " + std::to_string(b.m) + " level " + std::to_string(l);
          }
        }
      }
    }
    return std::string();
  });
  add(g, "permutation invariance", [&] {
    for (const Instance& in : instances) {
      std::vector<double> c(in.x.coords().begin(), in.x.coords().end());
      const std::size_t d = in.x.dim();
      const std::size_t n = in.x.size();
      for (std::size_t i = 0; i < n / 2; ++i) {
        std::swap_ranges(c.begin() + i * d, c.begin() + (i + 1) * d, c.begin() + (n - 1 - i) * d);
      }
      const EmpiricalMeasure y(d, std::move(c));
      const double a = delta_p(in.x, *in.mu, in.p, 8, 4, std::nullopt, opts).delta_p;
      const double b = delta_p(y, *in.mu, in.p, 8, 4, std::nullopt, opts).delta_p;
      if (rel_diff(a, b) > 1e-12) return in.mu->spec() + ": " + fmt(a) + " vs " + fmt(b);
    }
    return std::string();
  });
  add(g, "truncation soundness", [&] {
    for (const Instance& in : instances) {
      const auto coarse = delta_p(in.x, *in.mu, in.p, 3, 3, std::nullopt, opts);
      const auto fine = delta_p(in.x, *in.mu, in.p, 5, 5, std::nullopt, opts);
      if (std::abs(fine.delta_p - coarse.delta_p) > coarse.tail_bound * (1 + 1e-9) + 1e-12) {
        return in.mu->spec() + ": change " + fmt(fine.delta_p - coarse.delta_p) +
               " > bound " + fmt(coarse.tail_bound);
      }
    }
    return std::string();
  });
  add(g, "D_p dominated by Delta_p", [&] {
    for (const Instance& in : instances) {
      const auto prof = delta_p(in.x, *in.mu, in.p, 8, default_l_max(in.x.dim()),
                                std::nullopt, opts);
      if (prof.d_p > lemma_ratio(in.p) * prof.delta_p + 1e-12) {
        return in.mu->spec() + ": " + fmt(prof.d_p) + " vs " + fmt(prof.delta_p);
      }
    }
    return std::string();
  });
  add(g, "truncation split bounds Delta_p", [&] {
    for (const Instance& in : instances) {
      for (double m : {0.5, 1.0, 2.0, 3.5, 10.0}) {
        const auto prof = delta_p(in.x, *in.mu, in.p, 8, 4, m, opts);
        if (prof.delta_p > prof.a_pm + prof.b_pm + 1e-12 * (1.0 + prof.delta_p)) {
          return in.mu->spec() + " M = " + fmt(m);
        }
      }
    }
    return std::string();
  });
  return g;
}

// Sample on the dyadic grid, so every point lies on cell faces.
EmpiricalMeasure grid_points(std::uint64_t seed, std::size_t d) {
  Stream s(seed, 505);
  std::vector<double> c;
  for (int i = 0; i < 64; ++i) {
    const int m = static_cast<int>(s.below(3));
    for (std::size_t k = 0; k < d; ++k) {
      const double step = std::ldexp(1.0, m - 3);
      const auto steps = static_cast<double>(s.below(1u << (m + 4))) - std::ldexp(1.0, m + 3) + 1.0;
      c.push_back(steps * step);
    }
  }
  return EmpiricalMeasure(d, std::move(c));
}

GroupResult refinement_group(const Context& ctx) {
  GroupResult g{"refinement-consistency", {}};
  const auto opts = ctx.multiscale();
  add(g, "points lie in their cells", [&] {
    for (std::size_t d : {1u, 2u}) {
      const auto x = grid_points(ctx.options.seed, d);
      const int level = 5;
      std::vector<int> blocks(x.size());
      std::vector<std::uint32_t> cells(x.size() * d);
      kernels::dyadic_locate(x, level, blocks, cells, opts.convention, opts.backend);
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t k = 0; k < d; ++k) {
          const double v = x.point(i)[k];
          const double lo = cell_lower(cells[i * d + k], blocks[i], level);
          const double hi = cell_upper(cells[i * d + k], blocks[i], level);
          if (!(lo < v && v <= hi)) {
            return "point " + fmt(v) + " outside (" + fmt(lo) + ", " + fmt(hi) + "]";
          }
        }
      }
    }
    return std::string();
  });
  add(g, "self-discrepancy vanishes", [&] {
    for (std::size_t d : {1u, 2u}) {
      const auto x = grid_points(ctx.options.seed, d);
      const MeasurePtr ref = atomic_measure(x);
      const auto prof = delta_p(x, *ref, 1.0, 4, 6, std::nullopt, opts);
      if (prof.delta_p > 1e-12) return "d = " + std::to_string(d) + ": " + fmt(prof.delta_p);
    }
    return std::string();
  });
  add(g, "coarse cells contain fine cells", [&] {
    const auto x = grid_points(ctx.options.seed, 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int m = block_index(x.point(i));
      const auto fine = cell_key(x.point(i), m, 5, opts.convention);
      for (int l = 0; l < 5; ++l) {
        const auto coarse = cell_key(x.point(i), m, l, opts.convention);
        for (std::size_t k = 0; k < 2; ++k) {
          if (coarse.cell[k] != fine.cell[k] >> (5 - l)) return "level " + std::to_string(l);
        }
      }
    }
    return std::string();
  });
  return g;
}

GroupResult theory_group(const Context&) {
  GroupResult g{"theory", {}};
  using theory::ProblemParams;
  using theory::Regime;
  using theory::Statistic;
  add(g, "classify monotone in p", [] {
    for (int d = 1; d <= 6; ++d) {
      for (Rational r : {Rational(3, 2), Rational(5, 4), Rational(3)}) {
        int last = -1;
        for (int k = 0; k <= 40; ++k) {
          ProblemParams pp;
          pp.d = d;
          pp.r = r;
          pp.p = Rational(1) + Rational(k, 8);
          const Regime g = theory::classify(pp);
          const int rank = g == Regime::kLargeDim ? 0 : g == Regime::kBoundary ? 1 : 2;
          if (rank < last) return "d = " + std::to_string(d);
          last = rank;
        }
      }
    }
    return std::string();
  });
  add(g, "mean exponents continuous across the boundary", [] {
    for (int d : {4, 6, 8}) {
      const Rational r(3, 2);
      const Rational thr = Rational(d) * (r - 1) / r;
      const Rational eps(1, 1000);
      ProblemParams above, below;
      above.d = below.d = d;
      above.r = below.r = r;
      above.p = thr + eps;
      below.p = thr - eps;
      const auto a = theory::moment_rate(above, Statistic::kMean);
      const auto b = theory::moment_rate(below, Statistic::kMean);
      if (a.exponent != b.exponent - eps / Rational(d)) return "d = " + std::to_string(d);
    }
    return std::string();
  });
  add(g, "moment exponents negative", [] {
    const auto table = theory::export_table();
    for (const auto& row : table) {
      if (!row.contains("prediction") || row["prediction"]["no_prediction"].get<bool>()) continue;
      const std::string e = row["prediction"]["exponent"];
      if (e.front() != '-') return "row " + row.dump();
    }
    return std::string();
  });
  add(g, "deviation envelope non-increasing", [] {
    for (int d : {1, 3, 4}) {
      for (Rational r : {Rational(3, 2), Rational(3)}) {
        ProblemParams pp;
        pp.d = d;
        pp.r = r;
        const bool boundary = theory::classify(pp) == Regime::kBoundary;
        double prev_n = std::numeric_limits<double>::infinity();
        for (double n = boundary ? 1024 : 1; n < 1e7; n *= 2) {
          const double v = theory::deviation_bound(pp, n, 0.3).value;
          if (v > prev_n * (1 + 1e-12)) return "n at d = " + std::to_string(d);
          prev_n = v;
        }
        if (boundary) continue;
        double prev_x = std::numeric_limits<double>::infinity();
        for (double x = 0.01; x < 100; x *= 1.5) {
          const double v = theory::deviation_bound(pp, 100, x).value;
          if (v > prev_x * (1 + 1e-12)) return "x at d = " + std::to_string(d);
          prev_x = v;
        }
      }
    }
    return std::string();
  });
  return g;
}

GroupResult experiments_group(const Context& ctx) {
  GroupResult g{"experiments", {}};
  using experiments::ExperimentConfig;
  add(g, "slope fit recovers an exact line", [] {
    std::vector<experiments::WeightedPoint> pts;
    for (double n : {16.0, 32.0, 64.0, 128.0, 256.0}) pts.push_back({n, 3.0 / std::sqrt(n), 1.0});
    const auto fit = experiments::fit_loglog_slope(pts);
    if (std::abs(fit.slope + 0.5) > 1e-12 || fit.stderr > 1e-12) {
      return "slope " + fmt(fit.slope) + " stderr " + fmt(fit.stderr);
    }
    return std::string();
  });
  add(g, "verdict band rule", [] {
    theory::RatePrediction pred;
    pred.exponent = Rational(-1, 2);
    if (experiments::verdict(-0.48, pred, 0.05) != experiments::Verdict::kConsistent) return std::string("-0.48");
    if (experiments::verdict(-0.30, pred, 0.05) != experiments::Verdict::kInconsistent) return std::string("-0.30");
    if (experiments::verdict(-0.40, pred, experiments::default_band(0.04)) !=
        experiments::Verdict::kConsistent) {
      return std::string("band 0.12");
    }
    return std::string();
  });
  ExperimentConfig base;
  base.measure = "uniform:d=1";
  base.p = 1.0;
  base.n_grid = {32, 64, 128, 256};
  base.replicates = 40;
  base.seed = ctx.options.seed;
  add(g, "reports are deterministic", [&] {
    const auto a = experiments::to_json(experiments::run_moment_rate(base));
    const auto b = experiments::to_json(experiments::run_moment_rate(base));
    if (experiments::strip_runtime(a).dump() != experiments::strip_runtime(b).dump()) {
      return std::string("reports differ");
    }
    return std::string();
  });
  add(g, "two-sample and semidiscrete slopes agree", [&] {
    ExperimentConfig two = base;
    two.estimator = experiments::Estimator::kTwoSample;
    ExperimentConfig semi = base;
    semi.estimator = experiments::Estimator::kSemidiscrete;
    const auto a = experiments::run_moment_rate(two);
    const auto b = experiments::run_moment_rate(semi);
    const double tol = 2.0 * std::hypot(a.fit->stderr, b.fit->stderr);
    if (std::abs(a.fit->slope - b.fit->slope) > tol) {
      return fmt(a.fit->slope) + " vs " + fmt(b.fit->slope) + " (tolerance " + fmt(tol) + ")";
    }
    return std::string();
  });
  add(g, "degenerate measure is inconclusive", [&] {
    ExperimentConfig c = base;
    c.measure = "dirac:at=0";
    c.replicates = 20;
    const auto r = experiments::run_moment_rate(c);
    for (double v : r.values) {
      if (v != 0.0) return "nonzero value " + fmt(v);
    }
    if (r.verdict != experiments::Verdict::kInconclusive) return std::string("verdict");
    return std::string();
  });
  return g;
}

}  // namespace

Fault parse_fault(const std::string& text) {
  if (text == "none") return Fault::kNone;
  if (text == "cell-boundary") return Fault::kCellBoundary;
  throw InputError("unknown fault '" + text + "'");
}

bool GroupResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<std::string> group_names() {
  return {"measures", "transport", "multiscale", "refinement-consistency", "theory",
          "experiments"};
}

std::vector<GroupResult> run(const VerifyOptions& options) {
  const auto names = group_names();
  if (options.group &&
      std::find(names.begin(), names.end(), *options.group) == names.end()) {
    throw InputError("unknown verify group '" + *options.group + "'");
  }
  const Context ctx{options};
  using Runner = GroupResult (*)(const Context&);
  const std::vector<std::pair<std::string, Runner>> runners = {
      {"measures", measures_group},
      {"transport", transport_group},
      {"multiscale", multiscale_group},
      {"refinement-consistency", refinement_group},
      {"theory", theory_group},
      {"experiments", experiments_group}};
  std::vector<GroupResult> out;
  for (const auto& [name, runner] : runners) {
    if (options.group && *options.group != name) continue;
    out.push_back(runner(ctx));
  }
  return out;
}

}  // namespace empwass::verify
