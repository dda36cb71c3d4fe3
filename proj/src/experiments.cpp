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

#include "empwass/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "empwass/errors.hpp"
#include "empwass/kernels.hpp"
#include "empwass/rng.hpp"

namespace empwass::experiments {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string hex(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32), 0x5du};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double mean_of(std::span<const double> sorted) {
  return pairwise_sum(sorted) / static_cast<double>(sorted.size());
}

double variance_of(std::span<const double> sorted, double mean) {
  if (sorted.size() < 2) return 0.0;
  std::vector<double> sq(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    sq[i] = (sorted[i] - mean) * (sorted[i] - mean);
  }
  std::sort(sq.begin(), sq.end());
  return pairwise_sum(sq) / static_cast<double>(sorted.size() - 1);
}

// Linear interpolation between order statistics (type 7).
double quantile_of(std::span<const double> sorted, double u) {
  if (sorted.empty()) return kNaN;
  const double h = u * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> finite_sorted(std::span<const double> values) {
  std::vector<double> out;
  for (double v : values) {
    if (std::isfinite(v)) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> powers(std::span<const double> sorted, double r) {
  std::vector<double> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out[i] = std::pow(std::abs(sorted[i]), r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Estimator parse_estimator(const std::string& text) {
  for (Estimator e : {Estimator::kSemidiscrete, Estimator::kTwoSample,
                      Estimator::kExact1d}) {
    if (to_string(e) == text) return e;
  }
  throw InputError("unknown estimator '" + text + "'");
}

Normalization parse_normalization(const std::string& text) {
  for (Normalization n : {Normalization::kAuto, Normalization::kLil,
                          Normalization::kAsRate, Normalization::kNone}) {
    if (to_string(n) == text) return n;
  }
  throw InputError("unknown normalization '" + text + "'");
}

template <typename T>
T get_key(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError("config key '" + key + "': " + e.what());
  }
}

void check_estimator(const ExperimentConfig& config,
                     const AnalyticMeasure& mu) {
  if (config.estimator == Estimator::kExact1d &&
      (mu.dim() != 1 || !mu.has_quantile())) {
    throw InputError("exact_1d estimator needs a one-dimensional measure with a quantile function");
  }
}

// One replicate of W_p^p(mu_n, mu) at grid index i.
double replicate_value(const ExperimentConfig& config, const AnalyticMeasure& mu,
                       std::size_t n, std::size_t i, std::size_t j) {
  SolverOptions solver = config.solver;
  solver.backend = kernels::Backend::kSerial;
  Stream stream(config.seed, j, 2 * i);
  std::vector<double> coords;
  append_draws(mu, n, stream, coords);
  const EmpiricalMeasure x(mu.dim(), std::move(coords));
  switch (config.estimator) {
    case Estimator::kExact1d:
      return wasserstein_1d_quantile(x, mu, config.p);
    case Estimator::kSemidiscrete:
      return semidiscrete_wp(x, mu, config.p, config.oversample,
                             derive_seed(config.seed, j, i), solver)
          .value;
    case Estimator::kTwoSample: {
      Stream second(config.seed, j, 2 * i + 1);
      std::vector<double> other;
      append_draws(mu, n, second, other);
      const EmpiricalMeasure y(mu.dim(), std::move(other));
      return wasserstein(x, y, config.p, solver).value;
    }
  }
  return kNaN;
}

struct Simulation {
  std::vector<double> values;  // index i * K + j
  std::vector<std::string> errors;
  std::vector<double> seconds;
};

// Fills the rows of sim for the requested grid indices, largest n first.
void simulate(const ExperimentConfig& config, const AnalyticMeasure& mu,
              std::span<const std::size_t> indices, Simulation& sim) {
  const std::size_t k = config.replicates;
  const std::size_t g = config.n_grid.size();
  if (sim.values.empty()) {
    sim.values.assign(g * k, kNaN);
    sim.errors.assign(g * k, "");
    sim.seconds.assign(g * k, 0.0);
  }
  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end(), std::greater<>());
  kernels::for_each_index(
      order.size() * k,
      [&](std::size_t t) {
        const std::size_t i = order[t / k];
        const std::size_t j = t % k;
        const auto start = Clock::now();
        try {
          sim.values[i * k + j] = replicate_value(config, mu, config.n_grid[i], i, j);
        } catch (const std::exception& e) {
          sim.errors[i * k + j] = e.what();
        }
        sim.seconds[i * k + j] = seconds_since(start);
      },
      kernels::Backend::kOpenMP);
}

void apply_threads(int threads) {
  if (threads > 0) kernels::set_threads(threads);
}

void check_moments(const ExperimentConfig& config, const AnalyticMeasure& mu,
                   const theory::ProblemParams& params) {
  const double q = config.r * config.p;
  auto require = [&](bool strong) {
    const double value = strong ? strong_moment(mu, q) : weak_moment(mu, q);
    if (!std::isfinite(value)) {
      throw Refusal(std::string(strong ? "strong" : "weak") + " moment of order rp = " +
                    std::to_string(q) + " diverges for " + mu.spec());
    }
  };
  auto require_sqrt = [&] {
    if (!params.sqrt_tail_integrable) {
      throw Refusal("int t^(p-1) sqrt(H(t)) dt diverges for " + mu.spec());
    }
  };
  switch (config.statistic) {
    case theory::Statistic::kMean:
      if (!params.sqrt_tail_integrable) {
        require(config.moment_kind == theory::MomentKind::kStrong);
      }
      break;
    case theory::Statistic::kSecondMoment:
    case theory::Statistic::kLilRate:
      require_sqrt();
      break;
    case theory::Statistic::kRMoment:
    case theory::Statistic::kAsRate:
      require(true);
      break;
    case theory::Statistic::kDeviationProb:
      require(config.moment_kind == theory::MomentKind::kStrong);
      break;
  }
}

std::vector<WeightedPoint> corrected_points(
    const std::vector<std::size_t>& ns, const std::vector<double>& stats,
    const std::vector<double>& weights, const theory::RatePrediction& pred) {
  const double lp = theory::to_double(pred.log_power);
  const double llp = theory::to_double(pred.loglog_power);
  std::vector<WeightedPoint> out;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double n = static_cast<double>(ns[i]);
    double value = stats[i];
    if (lp != 0.0) value /= std::pow(std::log(n), lp);
    if (llp != 0.0) {
      if (n < 16.0) continue;
      value /= std::pow(std::log(std::log(n)), llp);
    }
    out.push_back({n, value, weights[i]});
  }
  return out;
}

// Verdict with the boundary rule: inconclusive unless R^2 > 0.99.
Verdict judge(const SlopeFit& fit, const theory::RatePrediction& pred,
              double band, std::string& reason) {
  if (pred.no_prediction) {
    reason = "no prediction: " + pred.note;
    return Verdict::kInconclusive;
  }
  if (pred.regime == theory::Regime::kBoundary && fit.r_squared <= 0.99) {
    reason = "boundary regime with R^2 <= 0.99";
    return Verdict::kInconclusive;
  }
  return verdict(fit.slope, pred, band);
}

double wilson_half(double phat, double trials, double z, double& center) {
  const double denom = 1.0 + z * z / trials;
  center = (phat + z * z / (2.0 * trials)) / denom;
  return z * std::sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) /
         denom;
}

json runtime_json(double wall, int threads, const std::vector<double>& per_n) {
  return {{"wall_seconds", wall},
          {"threads", threads},
          {"per_n_seconds", per_n},
          {"timestamp", timestamp()}};
}

std::vector<double> per_n_seconds(const Simulation& sim, std::size_t g,
                                  std::size_t k) {
  std::vector<double> out(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < k; ++j) out[i] += sim.seconds[i * k + j];
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::string to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::kSemidiscrete: return "semidiscrete";
    case Estimator::kTwoSample: return "two_sample";
    case Estimator::kExact1d: return "exact_1d";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kConsistent: return "consistent";
    case Verdict::kInconsistent: return "inconsistent";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(Normalization normalization) {
  switch (normalization) {
    case Normalization::kAuto: return "auto";
    case Normalization::kLil: return "lil";
    case Normalization::kAsRate: return "as_rate";
    case Normalization::kNone: return "none";
  }
  return "?";
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  static const std::set<std::string> known = {
      "measure", "p", "r", "moment_kind", "statistic", "n_grid", "replicates",
      "estimator", "exact_threshold", "assignment_cap", "epsilon_factor",
      "max_iter", "tolerance", "seed", "oversample", "x_grid", "alpha",
      "normalization", "trajectories", "threads", "band", "bootstrap",
      "epsilon"};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) {
      throw InputError("unknown config key '" + item.key() + "'");
    }
  }
  ExperimentConfig c;
  if (!j.contains("measure")) throw InputError("config key 'measure' is required");
  if (!j.contains("n_grid")) throw InputError("config key 'n_grid' is required");
  c.measure = get_key<std::string>(j, "measure");
  c.n_grid = get_key<std::vector<std::size_t>>(j, "n_grid");
  if (j.contains("p")) c.p = get_key<double>(j, "p");
  if (j.contains("r")) c.r = get_key<double>(j, "r");
  if (j.contains("moment_kind")) {
    c.moment_kind = theory::parse_moment_kind(get_key<std::string>(j, "moment_kind"));
  }
  if (j.contains("statistic")) {
    c.statistic = theory::parse_statistic(get_key<std::string>(j, "statistic"));
  }
  if (j.contains("replicates")) c.replicates = get_key<std::size_t>(j, "replicates");
  if (j.contains("estimator")) {
    c.estimator = parse_estimator(get_key<std::string>(j, "estimator"));
  }
  if (j.contains("exact_threshold")) {
    c.solver.exact_threshold = get_key<std::size_t>(j, "exact_threshold");
  }
  if (j.contains("assignment_cap")) {
    c.solver.assignment_cap = get_key<std::size_t>(j, "assignment_cap");
  }
  if (j.contains("epsilon_factor")) {
    c.solver.epsilon_factor = get_key<double>(j, "epsilon_factor");
  }
  if (j.contains("max_iter")) c.solver.max_iter = get_key<int>(j, "max_iter");
  if (j.contains("tolerance")) c.solver.tolerance = get_key<double>(j, "tolerance");
  if (j.contains("seed")) c.seed = get_key<std::uint64_t>(j, "seed");
  if (j.contains("oversample")) c.oversample = get_key<std::size_t>(j, "oversample");
  if (j.contains("x_grid")) c.x_grid = get_key<std::vector<double>>(j, "x_grid");
  if (j.contains("alpha")) c.alpha = get_key<double>(j, "alpha");
  if (j.contains("normalization")) {
    c.normalization = parse_normalization(get_key<std::string>(j, "normalization"));
  }
  if (j.contains("trajectories")) {
    c.trajectories = get_key<std::size_t>(j, "trajectories");
  }
  if (j.contains("threads")) c.threads = get_key<int>(j, "threads");
  if (j.contains("band")) c.band = get_key<double>(j, "band");
  if (j.contains("bootstrap")) c.bootstrap = get_key<std::size_t>(j, "bootstrap");
  if (j.contains("epsilon")) c.epsilon = get_key<double>(j, "epsilon");

  if (!(c.p >= 1.0)) throw InputError("p must be >= 1");
  if (!(c.r > 1.0)) throw InputError("r must be > 1");
  if (c.replicates < 1) throw InputError("replicates must be >= 1");
  if (c.oversample < 1) throw InputError("oversample must be >= 1");
  if (c.threads < 0) throw InputError("threads must be >= 0");
  if (c.trajectories < 1) throw InputError("trajectories must be >= 1");
  if (c.solver.max_iter < 1) throw InputError("max_iter must be >= 1");
  if (!(c.solver.epsilon_factor > 0.0)) throw InputError("epsilon_factor must be > 0");
  if (!(c.solver.tolerance > 0.0)) throw InputError("tolerance must be > 0");
  if (c.band && !(*c.band > 0.0)) throw InputError("band must be > 0");
  if (c.alpha && !(*c.alpha > 0.0 && *c.alpha <= 1.0)) {
    throw InputError("alpha must lie in (0, 1]");
  }
  for (double x : c.x_grid) {
    if (!(x > 0.0)) throw InputError("x_grid values must be > 0");
  }
  parse_measure(c.measure);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j = {{"measure", c.measure},
            {"p", c.p},
            {"r", c.r},
            {"moment_kind", theory::to_string(c.moment_kind)},
            {"statistic", theory::to_string(c.statistic)},
            {"n_grid", c.n_grid},
            {"replicates", c.replicates},
            {"estimator", to_string(c.estimator)},
            {"exact_threshold", c.solver.exact_threshold},
            {"assignment_cap", c.solver.assignment_cap},
            {"epsilon_factor", c.solver.epsilon_factor},
            {"max_iter", c.solver.max_iter},
            {"tolerance", c.solver.tolerance},
            {"seed", c.seed},
            {"oversample", c.oversample},
            {"x_grid", c.x_grid},
            {"normalization", to_string(c.normalization)},
            {"trajectories", c.trajectories},
            {"threads", c.threads},
            {"bootstrap", c.bootstrap},
            {"epsilon", c.epsilon}};
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.band) j["band"] = *c.band;
  return j;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  // Thread count does not affect results.
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

void validate(const ExperimentConfig& config, bool slope_run) {
  if (config.n_grid.size() < 4) throw InputError("n_grid needs at least 4 sizes");
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] < 1) throw InputError("n_grid values must be >= 1");
    if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) {
      throw InputError("n_grid must be strictly increasing");
    }
  }
  if (slope_run && config.replicates < 20) {
    throw InputError("slope runs need replicates >= 20");
  }
}

SlopeFit fit_loglog_slope(std::span<const WeightedPoint> points) {
  std::set<double> distinct;
  for (const WeightedPoint& pt : points) {
    if (!(pt.value > 0.0) || !std::isfinite(pt.value)) {
      throw InputError("slope fit needs positive finite values");
    }
    if (!(pt.n > 0.0)) throw InputError("slope fit needs n > 0");
    if (!(pt.weight > 0.0) || !std::isfinite(pt.weight)) {
      throw InputError("slope fit needs positive finite weights");
    }
    distinct.insert(pt.n);
  }
  if (distinct.size() < 4) throw InputError("slope fit needs at least 4 distinct n");
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (const WeightedPoint& pt : points) {
    sw += pt.weight;
    mx += pt.weight * std::log(pt.n);
    my += pt.weight * std::log(pt.value);
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const WeightedPoint& pt : points) {
    const double dx = std::log(pt.n) - mx;
    const double dy = std::log(pt.value) - my;
    sxx += pt.weight * dx * dx;
    sxy += pt.weight * dx * dy;
    syy += pt.weight * dy * dy;
  }
  SlopeFit fit;
  fit.points = points.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const WeightedPoint& pt : points) {
    const double res =
        std::log(pt.value) - fit.intercept - fit.slope * std::log(pt.n);
    rss += pt.weight * res * res;
  }
  // Guard tiny negative residual sums on exact lines.
  if (rss < 1e-28 * std::max(1.0, syy)) rss = 0.0;
  fit.stderr = std::sqrt(rss / (static_cast<double>(points.size()) - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  return fit;
}

double default_band(double stderr) { return std::max(0.05, 3.0 * stderr); }

Verdict verdict(double slope, const theory::RatePrediction& prediction,
                double band) {
  if (prediction.no_prediction || !std::isfinite(slope)) {
    return Verdict::kInconclusive;
  }
  return std::abs(slope - theory::to_double(prediction.exponent)) <= band
             ? Verdict::kConsistent
             : Verdict::kInconsistent;
}

theory::ProblemParams problem_params(const ExperimentConfig& config,
                                     const AnalyticMeasure& measure) {
  theory::ProblemParams params;
  params.p = theory::to_rational(config.p);
  params.d = static_cast<int>(measure.dim());
  params.r = theory::to_rational(config.r);
  params.moment_kind = config.moment_kind;
  params.sqrt_tail_integrable = std::isfinite(sqrt_tail_integral(measure, config.p));
  params.epsilon = theory::to_rational(config.epsilon);
  return params;
}

RateReport run_moment_rate(const ExperimentConfig& config) {
  const auto start = Clock::now();
  validate(config, true);
  const MeasurePtr mu = parse_measure(config.measure);
  check_estimator(config, *mu);
  const theory::ProblemParams params = problem_params(config, *mu);
  const theory::Statistic stat = config.statistic;
  if (stat != theory::Statistic::kMean && stat != theory::Statistic::kSecondMoment &&
      stat != theory::Statistic::kRMoment) {
    throw InputError("rates runs support mean, second_moment and r_moment; " +
                     theory::to_string(stat) + " belongs to deviations or trajectory runs");
  }
  apply_threads(config.threads);

  RateReport report;
  report.config = config;
  report.hash = config_hash(config);
  report.prediction = theory::moment_rate(params, stat);
  check_moments(config, *mu, params);

  const std::size_t g = config.n_grid.size();
  const std::size_t k = config.replicates;
  std::vector<std::size_t> all(g);
  for (std::size_t i = 0; i < g; ++i) all[i] = i;
  Simulation sim;
  simulate(config, *mu, all, sim);
  report.values = sim.values;
  const std::vector<double> seconds = per_n_seconds(sim, g, k);

  std::vector<std::size_t> fit_n;
  std::vector<double> fit_stat;
  std::vector<double> fit_se;
  bool any_zero_se = false;
  for (std::size_t i = 0; i < g; ++i) {
    NSummary s;
    s.n = config.n_grid[i];
    s.seconds = seconds[i];
    const std::span<const double> row(sim.values.data() + i * k, k);
    for (std::size_t j = 0; j < k; ++j) {
      if (!sim.errors[i * k + j].empty()) {
        ++s.failures;
        if (s.error.empty()) s.error = sim.errors[i * k + j];
      }
    }
    const std::vector<double> sorted = finite_sorted(row);
    if (sorted.empty()) {
      report.per_n.push_back(s);
      continue;
    }
    const double kk = static_cast<double>(sorted.size());
    s.mean = mean_of(sorted);
    s.variance = variance_of(sorted, s.mean);
    const std::vector<double> rpow = powers(sorted, config.r);
    s.r_moment = mean_of(rpow);
    s.q05 = quantile_of(sorted, 0.05);
    s.q50 = quantile_of(sorted, 0.5);
    s.q95 = quantile_of(sorted, 0.95);
    switch (stat) {
      case theory::Statistic::kMean:
        s.statistic = s.mean;
        s.statistic_stderr = std::sqrt(s.variance / kk);
        break;
      case theory::Statistic::kSecondMoment: {
        const std::vector<double> sq = powers(sorted, 2.0);
        s.statistic = mean_of(sq);
        s.statistic_stderr = std::sqrt(variance_of(sq, s.statistic) / kk);
        break;
      }
      default: {
        s.statistic = s.r_moment;
        Stream boot(config.seed, 0x626f6f74ull, i);
        std::vector<double> stats(config.bootstrap);
        std::vector<double> pick(sorted.size());
        for (std::size_t b = 0; b < config.bootstrap; ++b) {
          for (double& v : pick) v = rpow[boot.below(rpow.size())];
          std::sort(pick.begin(), pick.end());
          stats[b] = mean_of(pick);
        }
        std::sort(stats.begin(), stats.end());
        s.statistic_stderr =
            stats.size() > 1 ? std::sqrt(variance_of(stats, mean_of(stats))) : 0.0;
        break;
      }
    }
    if (s.failures == 0) {
      fit_n.push_back(s.n);
      fit_stat.push_back(s.statistic);
      fit_se.push_back(s.statistic_stderr);
      any_zero_se = any_zero_se || s.statistic_stderr == 0.0;
    }
    report.per_n.push_back(s);
  }

  std::vector<double> weights(fit_n.size(), 1.0);
  if (!any_zero_se) {
    for (std::size_t i = 0; i < fit_n.size(); ++i) {
      weights[i] = (fit_stat[i] / fit_se[i]) * (fit_stat[i] / fit_se[i]);
    }
  }
  const std::vector<WeightedPoint> points =
      corrected_points(fit_n, fit_stat, weights, report.prediction);
  try {
    report.fit = fit_loglog_slope(points);
  } catch (const InputError& e) {
    report.reason = std::string("slope undefined: ") + e.what();
  }
  if (report.fit) {
    report.band = config.band.value_or(default_band(report.fit->stderr));
    report.verdict = judge(*report.fit, report.prediction, report.band, report.reason);
  }
  report.threads = kernels::max_threads();
  report.wall_seconds = seconds_since(start);
  return report;
}

DeviationReport run_deviation_tail(const ExperimentConfig& config) {
  const auto start = Clock::now();
  validate(config, true);
  const MeasurePtr mu = parse_measure(config.measure);
  check_estimator(config, *mu);
  theory::ProblemParams params = problem_params(config, *mu);
  apply_threads(config.threads);

  DeviationReport report;
  report.config = config;
  report.hash = config_hash(config);
  report.alpha = config.alpha.value_or(1.0);
  report.prediction =
      theory::moderate_deviation_rate(params, theory::to_rational(report.alpha));
  {
    ExperimentConfig moments = config;
    moments.statistic = theory::Statistic::kDeviationProb;
    check_moments(moments, *mu, params);
  }

  const std::size_t g = config.n_grid.size();
  const std::size_t k = config.replicates;
  const double kk = static_cast<double>(k);
  const double n0 = static_cast<double>(config.n_grid.front());
  const double n_max = static_cast<double>(config.n_grid.back());
  auto scale = [&](double n) { return std::pow(n, report.alpha - 1.0); };

  Simulation sim;
  const std::size_t first = 0;
  simulate(config, *mu, std::span<const std::size_t>(&first, 1), sim);

  std::vector<double> xs = config.x_grid;
  if (xs.empty()) {
    const std::vector<double> sorted =
        finite_sorted(std::span<const double>(sim.values.data(), k));
    for (double u : {0.5, 0.8, 0.9, 0.95}) {
      const double x = quantile_of(sorted, u) / scale(n0);
      if (x > 0.0 && std::isfinite(x)) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.empty()) {
      throw Refusal("W_p^p vanishes at the smallest n; no usable x-grid");
    }
  }
  report.x_grid = xs;

  // Power pre-check along the predicted decay.
  const double decay =
      report.prediction.no_prediction ? 0.0 : theory::to_double(report.prediction.exponent);
  double best = 0.0;
  for (double x : xs) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (sim.values[j] > x * scale(n0)) ++hits;
    }
    best = std::max(best, static_cast<double>(hits) / kk * std::pow(n_max / n0, decay));
  }
  if (kk * best < 10.0) {
    if (best <= 0.0) {
      // Fewer than one hit in K: the exceedance rate is below 1/K.
      const double bound = 10.0 * kk / std::pow(n_max / n0, decay);
      throw Refusal("underpowered: no exceedances in K = " + std::to_string(k) +
                    " replicates at n = " + std::to_string(config.n_grid.front()) +
                    "; minimal K exceeds " + format_double(std::ceil(bound)) +
                    " (or lower the x-grid)");
    }
    const auto minimal = static_cast<std::size_t>(std::ceil(10.0 / best));
    throw Refusal("underpowered: expected exceedances at n = " +
                  std::to_string(config.n_grid.back()) + " below 10; minimal K = " +
                  std::to_string(minimal));
  }

  std::vector<std::size_t> rest;
  for (std::size_t i = 1; i < g; ++i) rest.push_back(i);
  simulate(config, *mu, rest, sim);
  report.values = sim.values;
  for (std::size_t i = 0; i < g * k; ++i) {
    if (!sim.errors[i].empty()) {
      throw std::runtime_error("solver failure at n = " +
                               std::to_string(config.n_grid[i / k]) + ": " +
                               sim.errors[i]);
    }
  }

  const double z = 1.959963984540054;
  for (std::size_t i = 0; i < g; ++i) {
    const double n = static_cast<double>(config.n_grid[i]);
    for (double x : xs) {
      DeviationCell cell;
      cell.n = config.n_grid[i];
      cell.x = x;
      cell.threshold = x * scale(n);
      cell.trials = k;
      for (std::size_t j = 0; j < k; ++j) {
        if (sim.values[i * k + j] > cell.threshold) ++cell.exceedances;
      }
      cell.probability = static_cast<double>(cell.exceedances) / kk;
      double center = 0.0;
      const double half = wilson_half(cell.probability, kk, z, center);
      cell.wilson_lo = std::clamp(center - half, 0.0, cell.probability);
      cell.wilson_hi = std::clamp(center + half, cell.probability, 1.0);
      cell.used = cell.exceedances >= 10;
      report.cells.push_back(cell);
    }
  }

  bool any_consistent = false;
  bool any_inconsistent = false;
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    DeviationFit df;
    df.x = xs[xi];
    std::vector<std::size_t> ns;
    std::vector<double> ps;
    std::vector<double> ws;
    for (std::size_t i = 0; i < g; ++i) {
      const DeviationCell& cell = report.cells[i * xs.size() + xi];
      if (!cell.used) continue;
      ns.push_back(cell.n);
      ps.push_back(cell.probability);
      ws.push_back(kk * cell.probability / (1.0 - cell.probability + 1.0 / kk));
    }
    const auto points = corrected_points(ns, ps, ws, report.prediction);
    try {
      df.fit = fit_loglog_slope(points);
    } catch (const InputError& e) {
      df.reason = std::string("slope undefined: ") + e.what();
    }
    if (df.fit) {
      df.band = config.band.value_or(default_band(df.fit->stderr));
      df.verdict = judge(*df.fit, report.prediction, df.band, df.reason);
      any_consistent = any_consistent || df.verdict == Verdict::kConsistent;
      any_inconsistent = any_inconsistent || df.verdict == Verdict::kInconsistent;
    }
    report.fits.push_back(df);
  }
  report.verdict = any_inconsistent  ? Verdict::kInconsistent
                   : any_consistent ? Verdict::kConsistent
                                    : Verdict::kInconclusive;

  // Diagnostic: slope of log probability in log x at each n.
  std::vector<double> x_slopes;
  for (std::size_t i = 0; i < g; ++i) {
    double sx = 0.0, sy = 0.0, m = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      const DeviationCell& cell = report.cells[i * xs.size() + xi];
      if (!cell.used) continue;
      pts.emplace_back(std::log(cell.x), std::log(cell.probability));
    }
    if (pts.size() < 2) continue;
    for (const auto& [a, b] : pts) {
      sx += a;
      sy += b;
      m += 1.0;
    }
    sx /= m;
    sy /= m;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [a, b] : pts) {
      sxx += (a - sx) * (a - sx);
      sxy += (a - sx) * (b - sy);
    }
    if (sxx > 0.0) x_slopes.push_back(sxy / sxx);
  }
  if (!x_slopes.empty()) {
    std::sort(x_slopes.begin(), x_slopes.end());
    report.x_slope = quantile_of(x_slopes, 0.5);
  }
  report.threads = kernels::max_threads();
  report.wall_seconds = seconds_since(start);
  return report;
}

bool boundedness_violation(std::span<const double> normalized) {
  const std::size_t c = normalized.size();
  if (c < 4) return false;
  const std::size_t mid_lo = c / 4;
  const std::size_t mid_hi = (3 * c) / 4;
  std::vector<double> middle(normalized.begin() + static_cast<std::ptrdiff_t>(mid_lo),
                             normalized.begin() + static_cast<std::ptrdiff_t>(mid_hi));
  std::sort(middle.begin(), middle.end());
  const double median = quantile_of(middle, 0.5);
  const std::size_t tail_lo = c - std::max<std::size_t>(1, c / 4);
  for (std::size_t i = tail_lo; i < c; ++i) {
    if (normalized[i] > 3.0 * median) return true;
  }
  return false;
}

TrajectoryReport run_running_max(const ExperimentConfig& config) {
  const auto start = Clock::now();
  validate(config, false);
  const MeasurePtr mu = parse_measure(config.measure);
  check_estimator(config, *mu);
  if (config.estimator == Estimator::kTwoSample) {
    throw InputError("trajectory runs need a reference-based estimator (exact_1d or semidiscrete)");
  }
  const theory::ProblemParams params = problem_params(config, *mu);
  apply_threads(config.threads);

  TrajectoryReport report;
  report.config = config;
  report.hash = config_hash(config);
  Normalization norm = config.normalization;
  if (norm == Normalization::kAuto) {
    norm = params.sqrt_tail_integrable ? Normalization::kLil : Normalization::kAsRate;
  }
  report.normalization = norm;

  const double p = config.p;
  const double r = config.r;
  const double d = static_cast<double>(mu->dim());
  std::function<double(double)> factor = [](double) { return 1.0; };
  report.normalization_formula = "1";
  if (norm == Normalization::kLil) {
    const theory::Rational half(static_cast<long long>(mu->dim()), 2);
    if (params.p == half) throw InputError("no LIL normalization at p = d/2");
    if (config.n_grid.front() < 16) {
      throw InputError("LIL normalization needs checkpoints >= 16");
    }
    const double e = params.p > half ? 0.5 : p / d;
    factor = [e](double n) { return std::pow(n / std::log(std::log(n)), e); };
    report.normalization_formula = "(n/loglog n)^" + format_double(e);
    try {
      report.prediction = theory::moment_rate(params, theory::Statistic::kLilRate);
    } catch (const InputError&) {
    }
  } else if (norm == Normalization::kAsRate) {
    const theory::Rational vbe =
        theory::Rational(static_cast<long long>(mu->dim())) * (params.r - 1) / params.r;
    if (params.p == vbe) throw InputError("no a.s. normalization at p = d(r-1)/r");
    if (config.n_grid.front() < 2) {
      throw InputError("a.s. normalization needs checkpoints >= 2");
    }
    if (params.p > vbe) {
      const double e = (r - 1.0) / r;
      factor = [e](double n) { return std::pow(n, e); };
      report.normalization_formula = "n^" + format_double(e);
    } else {
      factor = [p, d, r](double n) {
        return std::pow(n, p / d) * std::pow(std::log(n), -1.0 / r);
      };
      report.normalization_formula =
          "n^" + format_double(p / d) + " (log n)^-" + format_double(1.0 / r);
    }
    try {
      theory::ProblemParams strong = params;
      strong.moment_kind = theory::MomentKind::kStrong;
      report.prediction = theory::moment_rate(strong, theory::Statistic::kAsRate);
    } catch (const InputError&) {
    }
  }

  const std::size_t t_count = config.trajectories;
  report.trajectories.resize(t_count);
  SolverOptions solver = config.solver;
  solver.backend = kernels::Backend::kSerial;
  kernels::for_each_index(
      t_count,
      [&](std::size_t t) {
        Trajectory& tr = report.trajectories[t];
        Stream stream(config.seed, t, 0);
        std::vector<double> coords;
        double running = 0.0;
        for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
          const std::size_t n = config.n_grid[i];
          append_draws(*mu, n - coords.size() / mu->dim(), stream, coords);
          const EmpiricalMeasure x(mu->dim(), coords);
          double w = 0.0;
          if (config.estimator == Estimator::kExact1d) {
            w = wasserstein_1d_quantile(x, *mu, p);
          } else {
            w = semidiscrete_wp(x, *mu, p, config.oversample,
                                derive_seed(config.seed, t, i), solver)
                    .value;
          }
          running = std::max(running, static_cast<double>(n) * w);
          tr.checkpoints.push_back(n);
          tr.values.push_back(w);
          tr.normalized.push_back(factor(static_cast<double>(n)) * w);
          tr.running_max.push_back(running);
        }
        tr.violation = boundedness_violation(tr.normalized);
      },
      kernels::Backend::kOpenMP);
  for (const Trajectory& tr : report.trajectories) {
    if (tr.violation) ++report.violations;
  }
  report.threads = kernels::max_threads();
  report.wall_seconds = seconds_since(start);
  return report;
}

json to_json(const RateReport& report) {
  json per_n = json::array();
  std::vector<double> seconds;
  for (const NSummary& s : report.per_n) {
    per_n.push_back({{"n", s.n},
                     {"mean", s.mean},
                     {"variance", s.variance},
                     {"r_moment", s.r_moment},
                     {"q05", s.q05},
                     {"q50", s.q50},
                     {"q95", s.q95},
                     {"statistic", s.statistic},
                     {"statistic_stderr", s.statistic_stderr},
                     {"failures", s.failures},
                     {"error", s.error}});
    seconds.push_back(s.seconds);
  }
  json fit = nullptr;
  if (report.fit) {
    fit = {{"slope", report.fit->slope},
           {"intercept", report.fit->intercept},
           {"stderr", report.fit->stderr},
           {"r_squared", report.fit->r_squared},
           {"points", report.fit->points}};
  }
  return {{"kind", "moment_rate"},
          {"config", to_json(report.config)},
          {"config_hash", hex(report.hash)},
          {"estimator", to_string(report.config.estimator)},
          {"statistic", theory::to_string(report.config.statistic)},
          {"per_n", per_n},
          {"fit", fit},
          {"prediction", theory::to_json(report.prediction)},
          {"band", report.band},
          {"verdict", to_string(report.verdict)},
          {"reason", report.reason},
          {"runtime", runtime_json(report.wall_seconds, report.threads, seconds)}};
}

json to_json(const DeviationReport& report) {
  json cells = json::array();
  for (const DeviationCell& c : report.cells) {
    cells.push_back({{"n", c.n},
                     {"x", c.x},
                     {"threshold", c.threshold},
                     {"exceedances", c.exceedances},
                     {"trials", c.trials},
                     {"probability", c.probability},
                     {"wilson_lo", c.wilson_lo},
                     {"wilson_hi", c.wilson_hi},
                     {"used", c.used}});
  }
  json fits = json::array();
  for (const DeviationFit& f : report.fits) {
    json fit = nullptr;
    if (f.fit) {
      fit = {{"slope", f.fit->slope},
             {"stderr", f.fit->stderr},
             {"r_squared", f.fit->r_squared},
             {"points", f.fit->points}};
    }
    fits.push_back({{"x", f.x},
                    {"fit", fit},
                    {"band", f.band},
                    {"verdict", to_string(f.verdict)},
                    {"reason", f.reason}});
  }
  json x_slope = nullptr;
  if (report.x_slope) x_slope = *report.x_slope;
  return {{"kind", "deviation_tail"},
          {"config", to_json(report.config)},
          {"config_hash", hex(report.hash)},
          {"estimator", to_string(report.config.estimator)},
          {"alpha", report.alpha},
          {"x_grid", report.x_grid},
          {"cells", cells},
          {"fits", fits},
          {"x_slope", x_slope},
          {"x_slope_note", "diagnostic; compare with prediction x_power"},
          {"prediction", theory::to_json(report.prediction)},
          {"verdict", to_string(report.verdict)},
          {"runtime", runtime_json(report.wall_seconds, report.threads, {})}};
}

json to_json(const TrajectoryReport& report) {
  json trajectories = json::array();
  for (const Trajectory& t : report.trajectories) {
    trajectories.push_back({{"checkpoints", t.checkpoints},
                            {"values", t.values},
                            {"normalized", t.normalized},
                            {"running_max", t.running_max},
                            {"violation", t.violation}});
  }
  json prediction = nullptr;
  if (report.prediction) prediction = theory::to_json(*report.prediction);
  return {{"kind", "running_max"},
          {"config", to_json(report.config)},
          {"config_hash", hex(report.hash)},
          {"normalization", to_string(report.normalization)},
          {"normalization_formula", report.normalization_formula},
          {"label", "boundedness heuristic, non-conclusive"},
          {"trajectories", trajectories},
          {"violations", report.violations},
          {"prediction", prediction},
          {"runtime", runtime_json(report.wall_seconds, report.threads, {})}};
}

json strip_runtime(json report) {
  report.erase("runtime");
  if (report.contains("config")) report["config"].erase("threads");
  return report;
}

std::string to_csv(const RateReport& report) {
  std::ostringstream out;
  out << "n,replicate,value\n";
  const std::size_t k = report.config.replicates;
  for (std::size_t i = 0; i < report.config.n_grid.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out << report.config.n_grid[i] << ',' << j << ','
          << format_double(report.values[i * k + j]) << '\n';
    }
  }
  return out.str();
}

std::string to_csv(const DeviationReport& report) {
  std::ostringstream out;
  out << "n,replicate,value\n";
  const std::size_t k = report.config.replicates;
  for (std::size_t i = 0; i < report.config.n_grid.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out << report.config.n_grid[i] << ',' << j << ','
          << format_double(report.values[i * k + j]) << '\n';
    }
  }
  return out.str();
}

std::string to_csv(const TrajectoryReport& report) {
  std::ostringstream out;
  out << "trajectory,n,value,normalized\n";
  for (std::size_t t = 0; t < report.trajectories.size(); ++t) {
    const Trajectory& tr = report.trajectories[t];
    for (std::size_t i = 0; i < tr.checkpoints.size(); ++i) {
      out << t << ',' << tr.checkpoints[i] << ',' << format_double(tr.values[i])
          << ',' << format_double(tr.normalized[i]) << '\n';
    }
  }
  return out.str();
}

}  // namespace empwass::experiments
