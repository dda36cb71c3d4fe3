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

#include "empwass/measures.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "empwass/errors.hpp"

namespace empwass {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_coords(std::size_t dim, const std::vector<double>& coords) {
  if (dim == 0) throw InputError("empirical measure: dimension must be >= 1");
  if (coords.size() % dim != 0) {
    throw InputError("empirical measure: coordinate count not a multiple of dim");
  }
  for (double c : coords) {
    if (!std::isfinite(c)) {
      throw InputError("empirical measure: non-finite coordinate");
    }
  }
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  check_coords(dim_, coords_);
  const std::size_t n = coords_.size() / dim_;
  weights_.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
}

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> coords,
                                   std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  check_coords(dim_, coords_);
  if (weights_.size() * dim_ != coords_.size()) {
    throw InputError("empirical measure: one weight per point required");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InputError("empirical measure: weights must be finite and >= 0");
    }
    total += w;
  }
  if (!weights_.empty() && std::abs(total - 1.0) > 1e-12) {
    throw InputError("empirical measure: weights must sum to 1");
  }
  const double first = weights_.empty() ? 0.0 : weights_.front();
  uniform_ = std::all_of(weights_.begin(), weights_.end(),
                         [first](double w) { return w == first; });
}

EmpiricalMeasure EmpiricalMeasure::slice(std::size_t begin,
                                         std::size_t end) const {
  if (begin > end || end > size()) {
    throw InputError("empirical measure: slice out of range");
  }
  return EmpiricalMeasure(
      dim_, std::vector<double>(coords_.begin() + begin * dim_,
                                coords_.begin() + end * dim_));
}

EmpiricalMeasure EmpiricalMeasure::replicate_atoms(std::size_t times) const {
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(coords_.size() * times);
  weights.reserve(size() * times);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t t = 0; t < times; ++t) {
      auto p = point(i);
      coords.insert(coords.end(), p.begin(), p.end());
      weights.push_back(weights_[i] / static_cast<double>(times));
    }
  }
  if (uniform_) return EmpiricalMeasure(dim_, std::move(coords));
  return EmpiricalMeasure(dim_, std::move(coords), std::move(weights));
}

EmpiricalMeasure EmpiricalMeasure::scaled(double factor) const {
  std::vector<double> coords(coords_);
  for (double& c : coords) c *= factor;
  if (uniform_) return EmpiricalMeasure(dim_, std::move(coords));
  return EmpiricalMeasure(dim_, std::move(coords), weights_);
}

EmpiricalMeasure EmpiricalMeasure::translated(
    std::span<const double> shift) const {
  if (shift.size() != dim_) throw InputError("dimension mismatch");
  std::vector<double> coords(coords_);
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] += shift[i % dim_];
  if (uniform_) return EmpiricalMeasure(dim_, std::move(coords));
  return EmpiricalMeasure(dim_, std::move(coords), weights_);
}

double AnalyticMeasure::box_mass(std::span<const Interval>) const {
  throw InputError("measure " + spec() + " has no cell-mass oracle");
}

double AnalyticMeasure::cdf(double) const {
  throw InputError("measure " + spec() + " has no quantile function");
}

double AnalyticMeasure::quantile(double) const {
  throw InputError("measure " + spec() + " has no quantile function");
}

double max_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Catalog: products of i.i.d. one-dimensional marginals.

namespace {

class Marginal {
 public:
  virtual ~Marginal() = default;
  virtual double draw(Stream& s) const = 0;
  // P(X <= x) and P(X < x).
  virtual double cdf(double x) const = 0;
  virtual double cdf_left(double x) const { return cdf(x); }
  // P(|X| > t).
  virtual double abs_tail(double t) const = 0;
  virtual double quantile(double u) const = 0;
  virtual std::optional<double> quantile_integral(double u) const = 0;

  double interval_mass(const Interval& iv) const {
    if (iv.hi < iv.lo) return 0.0;
    const double low = iv.lo_closed ? cdf_left(iv.lo) : cdf(iv.lo);
    return std::max(0.0, cdf(iv.hi) - low);
  }
};

class UniformUnit final : public Marginal {
 public:
  double draw(Stream& s) const override { return s.uniform(); }
  double cdf(double x) const override { return std::clamp(x, 0.0, 1.0); }
  double abs_tail(double t) const override {
    return std::clamp(1.0 - t, 0.0, 1.0);
  }
  double quantile(double u) const override { return u; }
  std::optional<double> quantile_integral(double u) const override {
    return 0.5 * u * u;
  }
};

class UniformSymmetric final : public Marginal {
 public:
  double draw(Stream& s) const override { return 2.0 * s.uniform() - 1.0; }
  double cdf(double x) const override {
    return std::clamp(0.5 * (x + 1.0), 0.0, 1.0);
  }
  double abs_tail(double t) const override {
    return std::clamp(1.0 - t, 0.0, 1.0);
  }
  double quantile(double u) const override { return 2.0 * u - 1.0; }
  std::optional<double> quantile_integral(double u) const override {
    return u * u - u;
  }
};

// X = S * R, S a uniform sign, P(R > t) = t^-beta for t >= 1.
class SymmetricPareto final : public Marginal {
 public:
  explicit SymmetricPareto(double beta) : beta_(beta) {}
  double draw(Stream& s) const override {
    const double sign = s.sign();
    return sign * std::pow(s.uniform_open_low(), -1.0 / beta_);
  }
  double cdf(double x) const override {
    if (x <= -1.0) return 0.5 * std::pow(-x, -beta_);
    if (x < 1.0) return 0.5;
    return 1.0 - 0.5 * std::pow(x, -beta_);
  }
  double abs_tail(double t) const override {
    return t < 1.0 ? 1.0 : std::pow(t, -beta_);
  }
  double quantile(double u) const override {
    if (u < 0.5) return -std::pow(2.0 * u, -1.0 / beta_);
    return std::pow(2.0 * (1.0 - u), -1.0 / beta_);
  }
  std::optional<double> quantile_integral(double u) const override {
    if (beta_ <= 1.0) return std::nullopt;
    const double k = 1.0 - 1.0 / beta_;
    if (u <= 0.5) return -0.5 * std::pow(2.0 * u, k) / k;
    const double half = -0.5 / k;
    return half + 0.5 * (1.0 - std::pow(2.0 * (1.0 - u), k)) / k;
  }

 private:
  double beta_;
};

class PointMass final : public Marginal {
 public:
  explicit PointMass(double at) : at_(at) {}
  double draw(Stream&) const override { return at_; }
  double cdf(double x) const override { return x >= at_ ? 1.0 : 0.0; }
  double cdf_left(double x) const override { return x > at_ ? 1.0 : 0.0; }
  double abs_tail(double t) const override {
    return t < std::abs(at_) ? 1.0 : 0.0;
  }
  double quantile(double) const override { return at_; }
  std::optional<double> quantile_integral(double u) const override {
    return at_ * u;
  }

 private:
  double at_;
};

// Mean euclidean norm of uniform [0,1]^d by nested Gauss-Kronrod.
double nested_norm_integral(std::size_t depth, double partial_sq) {
  using boost::math::quadrature::gauss_kronrod;
  if (depth == 0) return std::sqrt(partial_sq);
  auto inner = [&](double x) {
    return nested_norm_integral(depth - 1, partial_sq + x * x);
  };
  return gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 8, 1e-11);
}

class ProductMeasure final : public AnalyticMeasure {
 public:
  enum class Kind { kUniform, kUniformSym, kPareto, kParetoProd, kDirac };

  ProductMeasure(Kind kind, std::size_t dim, double param,
                 std::unique_ptr<Marginal> marginal)
      : kind_(kind), dim_(dim), param_(param), marginal_(std::move(marginal)) {}

  std::string spec() const override {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
      case Kind::kUniform:
        out << "uniform:d=" << dim_;
        break;
      case Kind::kUniformSym:
        out << "uniform_sym:d=" << dim_;
        break;
      case Kind::kPareto:
        out << "pareto:beta=" << param_ << ",d=1";
        break;
      case Kind::kParetoProd:
        out << "pareto_prod:beta=" << param_ << ",d=" << dim_;
        break;
      case Kind::kDirac:
        out << "dirac:at=" << param_ << ",d=" << dim_;
        break;
    }
    return out.str();
  }

  std::size_t dim() const override { return dim_; }

  void draw(Stream& stream, std::span<double> out) const override {
    for (double& v : out) v = marginal_->draw(stream);
  }

  double tail(double t) const override {
    if (t < 0.0) return 1.0;
    // 1 - (1 - a)^d without cancellation for small a.
    const double a = marginal_->abs_tail(t);
    return std::clamp(
        -std::expm1(static_cast<double>(dim_) * std::log1p(-a)), 0.0, 1.0);
  }

  TailEnvelope tail_envelope() const override {
    switch (kind_) {
      case Kind::kUniform:
      case Kind::kUniformSym:
        return {kInf, 1.0, 1.0};
      case Kind::kPareto:
      case Kind::kParetoProd:
        return {param_, static_cast<double>(dim_), 1.0};
      case Kind::kDirac:
        return {kInf, 1.0, std::abs(param_)};
    }
    return {kInf, 1.0, 1.0};
  }

  std::vector<double> tail_breakpoints() const override {
    if (kind_ == Kind::kDirac) return {std::abs(param_)};
    return {1.0};
  }

  bool has_box_mass() const override { return true; }

  double box_mass(std::span<const Interval> box) const override {
    if (box.size() != dim_) throw InputError("box dimension mismatch");
    double mass = 1.0;
    for (const Interval& iv : box) {
      mass *= marginal_->interval_mass(iv);
      if (mass == 0.0) break;
    }
    return mass;
  }

  std::optional<double> closed_weak_moment(double q) const override {
    const double d = static_cast<double>(dim_);
    switch (kind_) {
      case Kind::kUniform:
      case Kind::kUniformSym:
        return std::pow(q / (q + d), q / d) * d / (q + d);
      case Kind::kPareto:
        return q <= param_ ? 1.0 : kInf;
      case Kind::kParetoProd:
        if (q > param_) return kInf;
        if (q == param_) return d;
        return std::nullopt;
      case Kind::kDirac:
        return std::pow(std::abs(param_), q);
    }
    return std::nullopt;
  }

  std::optional<double> closed_strong_moment(double q) const override {
    const double d = static_cast<double>(dim_);
    switch (kind_) {
      case Kind::kUniform:
      case Kind::kUniformSym:
        return d / (q + d);
      case Kind::kPareto:
        return q < param_ ? param_ / (param_ - q) : kInf;
      case Kind::kParetoProd: {
        if (q >= param_) return kInf;
        // 1 - (1 - u)^d expanded in u = t^-beta on t >= 1.
        double total = 1.0;
        double binom = 1.0;
        for (std::size_t k = 1; k <= dim_; ++k) {
          binom = binom * static_cast<double>(dim_ - k + 1) /
                  static_cast<double>(k);
          const double sign = (k % 2 == 1) ? 1.0 : -1.0;
          total += sign * binom * q / (static_cast<double>(k) * param_ - q);
        }
        return total;
      }
      case Kind::kDirac:
        return std::pow(std::abs(param_), q);
    }
    return std::nullopt;
  }

  std::optional<double> closed_sqrt_tail_integral(double p) const override {
    const double d = static_cast<double>(dim_);
    switch (kind_) {
      case Kind::kUniform:
      case Kind::kUniformSym:
        return boost::math::beta(p / d, 1.5) / d;
      case Kind::kPareto:
        if (0.5 * param_ <= p) return kInf;
        return 1.0 / p + 1.0 / (0.5 * param_ - p);
      case Kind::kParetoProd:
        if (0.5 * param_ <= p) return kInf;
        return std::nullopt;
      case Kind::kDirac:
        return std::pow(std::abs(param_), p) / p;
    }
    return std::nullopt;
  }

  std::optional<double> mean_euclidean_norm() const override {
    switch (kind_) {
      case Kind::kUniform:
      case Kind::kUniformSym:
        if (dim_ > 3) return std::nullopt;
        return nested_norm_integral(dim_, 0.0);
      case Kind::kPareto:
        return param_ > 1.0 ? std::optional<double>(param_ / (param_ - 1.0))
                            : std::optional<double>(kInf);
      case Kind::kParetoProd:
        if (param_ <= 1.0) return kInf;
        if (dim_ == 1) return param_ / (param_ - 1.0);
        return std::nullopt;
      case Kind::kDirac:
        return std::abs(param_) * std::sqrt(static_cast<double>(dim_));
    }
    return std::nullopt;
  }

  bool has_quantile() const override { return dim_ == 1; }
  double cdf(double x) const override { return marginal_->cdf(x); }
  double quantile(double u) const override { return marginal_->quantile(u); }
  std::optional<double> quantile_integral(double u) const override {
    return marginal_->quantile_integral(u);
  }

 private:
  Kind kind_;
  std::size_t dim_;
  double param_;
  std::unique_ptr<Marginal> marginal_;
};

// Empirical point cloud used as a reference measure.
class AtomicMeasure final : public AnalyticMeasure {
 public:
  explicit AtomicMeasure(EmpiricalMeasure atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw InputError("atomic measure needs atoms");
    cumulative_.resize(atoms_.size());
    std::partial_sum(atoms_.weights().begin(), atoms_.weights().end(),
                     cumulative_.begin());
    radius_ = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      radius_ = std::max(radius_, max_norm(atoms_.point(i)));
    }
    if (atoms_.dim() == 1) {
      order_.resize(atoms_.size());
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      std::stable_sort(order_.begin(), order_.end(),
                       [this](std::size_t a, std::size_t b) {
                         return atoms_.point(a)[0] < atoms_.point(b)[0];
                       });
    }
  }

  std::string spec() const override {
    return "atoms:n=" + std::to_string(atoms_.size()) +
           ",d=" + std::to_string(atoms_.dim());
  }
  std::size_t dim() const override { return atoms_.dim(); }

  void draw(Stream& stream, std::span<double> out) const override {
    const double u = stream.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t i = std::min<std::size_t>(it - cumulative_.begin(),
                                          atoms_.size() - 1);
    auto p = atoms_.point(i);
    std::copy(p.begin(), p.end(), out.begin());
  }

  double tail(double t) const override {
    double mass = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (max_norm(atoms_.point(i)) > t) mass += atoms_.weight(i);
    }
    return mass;
  }

  TailEnvelope tail_envelope() const override { return {kInf, 1.0, radius_}; }

  std::vector<double> tail_breakpoints() const override {
    std::vector<double> br;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      br.push_back(max_norm(atoms_.point(i)));
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return br;
  }

  bool has_box_mass() const override { return true; }

  double box_mass(std::span<const Interval> box) const override {
    if (box.size() != atoms_.dim()) throw InputError("box dimension mismatch");
    double mass = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      auto p = atoms_.point(i);
      bool inside = true;
      for (std::size_t k = 0; k < box.size() && inside; ++k) {
        const Interval& iv = box[k];
        const bool above = iv.lo_closed ? p[k] >= iv.lo : p[k] > iv.lo;
        inside = above && p[k] <= iv.hi;
      }
      if (inside) mass += atoms_.weight(i);
    }
    return mass;
  }

  std::optional<double> closed_weak_moment(double q) const override {
    // sup of t^q H(t) is attained as t approaches an atom radius from below.
    double best = 0.0;
    for (double r : tail_breakpoints()) {
      best = std::max(best, std::pow(r, q) * tail(std::nextafter(r, 0.0)));
    }
    return best;
  }

  std::optional<double> closed_strong_moment(double q) const override {
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      total += atoms_.weight(i) * std::pow(max_norm(atoms_.point(i)), q);
    }
    return total;
  }

  std::optional<double> mean_euclidean_norm() const override {
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      total += atoms_.weight(i) * euclidean_norm(atoms_.point(i));
    }
    return total;
  }

  bool has_quantile() const override { return atoms_.dim() == 1; }

  double cdf(double x) const override {
    double mass = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_.point(i)[0] <= x) mass += atoms_.weight(i);
    }
    return mass;
  }

  double quantile(double u) const override {
    double acc = 0.0;
    for (std::size_t i : order_) {
      acc += atoms_.weight(i);
      if (acc >= u) return atoms_.point(i)[0];
    }
    return atoms_.point(order_.back())[0];
  }

  std::optional<double> quantile_integral(double u) const override {
    double acc = 0.0;
    double integral = 0.0;
    for (std::size_t i : order_) {
      const double w = atoms_.weight(i);
      const double take = std::min(w, std::max(0.0, u - acc));
      integral += take * atoms_.point(i)[0];
      acc += w;
      if (acc >= u) break;
    }
    return integral;
  }

 private:
  EmpiricalMeasure atoms_;
  std::vector<double> cumulative_;
  std::vector<std::size_t> order_;
  double radius_;
};

std::map<std::string, std::string> parse_keys(const std::string& spec,
                                              std::string& name) {
  std::map<std::string, std::string> keys;
  const auto colon = spec.find(':');
  name = spec.substr(0, colon);
  if (colon == std::string::npos) return keys;
  std::string rest = spec.substr(colon + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string item =
        rest.substr(pos, comma == std::string::npos ? std::string::npos
                                                    : comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InputError("measure spec '" + spec + "': expected key=value, got '" +
                       item + "'");
    }
    const std::string key = item.substr(0, eq);
    if (!keys.emplace(key, item.substr(eq + 1)).second) {
      throw InputError("measure spec '" + spec + "': duplicate key '" + key +
                       "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return keys;
}

double parse_real(const std::string& spec, const std::string& key,
                  const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InputError("measure spec '" + spec + "': bad value for " + key +
                     ": '" + text + "'");
  }
  return value;
}

std::size_t parse_dim(const std::string& spec, const std::string& text) {
  const double v = parse_real(spec, "d", text);
  if (v < 1.0 || v != std::floor(v) || v > 64.0) {
    throw InputError("measure spec '" + spec + "': d must be an integer in [1, 64]");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"uniform", "uniform_sym", "pareto", "pareto_prod", "dirac"};
}

MeasurePtr parse_measure(const std::string& spec) {
  std::string name;
  auto keys = parse_keys(spec, name);
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = keys.find(key);
    if (it == keys.end()) return std::nullopt;
    std::string v = it->second;
    keys.erase(it);
    return v;
  };
  auto finish = [&](MeasurePtr m) {
    if (!keys.empty()) {
      throw InputError("measure spec '" + spec + "': unknown key '" +
                       keys.begin()->first + "'");
    }
    return m;
  };
  using Kind = ProductMeasure::Kind;

  const auto d_text = take("d");
  std::size_t dim = d_text ? parse_dim(spec, *d_text) : 1;
  if (name == "uniform" || name == "uniform_sym") {
    const bool sym = name == "uniform_sym";
    std::unique_ptr<Marginal> marginal;
    if (sym) {
      marginal = std::make_unique<UniformSymmetric>();
    } else {
      marginal = std::make_unique<UniformUnit>();
    }
    return finish(std::make_shared<ProductMeasure>(
        sym ? Kind::kUniformSym : Kind::kUniform, dim, 0.0,
        std::move(marginal)));
  }
  if (name == "pareto" || name == "pareto_prod") {
    const auto beta_text = take("beta");
    if (!beta_text) throw InputError("measure spec '" + spec + "': beta required");
    const double beta = parse_real(spec, "beta", *beta_text);
    if (!(beta > 0.0)) throw InputError("measure spec '" + spec + "': beta must be > 0");
    if (name == "pareto" && dim != 1) {
      throw InputError("measure spec '" + spec +
                       "': pareto is one-dimensional; use pareto_prod");
    }
    return finish(std::make_shared<ProductMeasure>(
        name == "pareto" ? Kind::kPareto : Kind::kParetoProd, dim, beta,
        std::make_unique<SymmetricPareto>(beta)));
  }
  if (name == "dirac") {
    const auto at_text = take("at");
    const double at = at_text ? parse_real(spec, "at", *at_text) : 0.0;
    return finish(std::make_shared<ProductMeasure>(
        Kind::kDirac, dim, at, std::make_unique<PointMass>(at)));
  }
  throw InputError("unknown measure '" + name + "' in spec '" + spec + "'");
}

MeasurePtr atomic_measure(EmpiricalMeasure atoms) {
  return std::make_shared<AtomicMeasure>(std::move(atoms));
}

// ---------------------------------------------------------------------------

void append_draws(const AnalyticMeasure& measure, std::size_t n,
                  Stream& stream, std::vector<double>& coords) {
  const std::size_t d = measure.dim();
  const std::size_t offset = coords.size();
  coords.resize(offset + n * d);
  for (std::size_t i = 0; i < n; ++i) {
    measure.draw(stream, std::span<double>(coords.data() + offset + i * d, d));
  }
}

EmpiricalMeasure sample(const AnalyticMeasure& measure, std::size_t n,
                        std::uint64_t seed, std::uint64_t stream) {
  if (n == 0) throw InputError("sample: n must be >= 1");
  Stream s(seed, stream);
  std::vector<double> coords;
  append_draws(measure, n, s, coords);
  return EmpiricalMeasure(measure.dim(), std::move(coords));
}

double tail_H(const AnalyticMeasure& measure, double t) {
  if (t < 0.0) throw InputError("tail_H: t must be >= 0");
  return measure.tail(t);
}

double empirical_tail(const EmpiricalMeasure& x, double t) {
  double mass = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (max_norm(x.point(i)) > t) mass += x.weight(i);
  }
  return mass;
}

namespace quadrature {

namespace {

using boost::math::quadrature::gauss_kronrod;

// integral over [lower, inf) of t^power * H(t)^gamma, gamma in {1, 1/2}.
double tail_power_integral(const AnalyticMeasure& measure, double power,
                           double gamma, double lower) {
  const TailEnvelope env = measure.tail_envelope();
  auto shaped = [&](double t) {
    const double h = measure.tail(t);
    return gamma == 1.0 ? h : std::sqrt(h);
  };
  const bool bounded = std::isinf(env.exponent);
  if (!bounded && env.exponent * gamma <= power + 1.0) return kInf;

  const double split = std::max(lower, env.from);
  std::vector<double> knots{lower};
  for (double b : measure.tail_breakpoints()) {
    if (b > lower && b < split) knots.push_back(b);
  }
  knots.push_back(split);

  double total = 0.0;
  auto integrand = [&](double t) { return std::pow(t, power) * shaped(t); };
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] > knots[i]) {
      total += gauss_kronrod<double, 31>::integrate(integrand, knots[i],
                                                    knots[i + 1], 20, 1e-12);
    }
  }
  if (bounded) return total;

  // Beyond `split`: log-scale panels up to a cutoff whose envelope
  // remainder is below 1e-10.
  const double excess = env.exponent * gamma - power - 1.0;
  const double scale = std::pow(env.constant, gamma);
  double cutoff = std::pow(1e-10 * excess / scale, -1.0 / excess);
  cutoff = std::max(cutoff, 2.0 * split);
  auto log_integrand = [&](double s) {
    const double t = std::exp(s);
    return std::pow(t, power + 1.0) * shaped(t);
  };
  const double a = std::log(split);
  const double b = std::log(cutoff);
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 4.0)));
  const double width = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    total += gauss_kronrod<double, 31>::integrate(
        log_integrand, a + k * width, a + (k + 1) * width, 20, 1e-12);
  }
  return total;
}

}  // namespace

double strong_moment(const AnalyticMeasure& measure, double q) {
  return q * tail_power_integral(measure, q - 1.0, 1.0, 0.0);
}

double sqrt_tail_integral(const AnalyticMeasure& measure, double p) {
  return tail_power_integral(measure, p - 1.0, 0.5, 0.0);
}

double weak_moment(const AnalyticMeasure& measure, double q) {
  const TailEnvelope env = measure.tail_envelope();
  if (q > env.exponent) return kInf;
  const double top = std::isinf(env.exponent)
                         ? std::max(env.from, 1e-300)
                         : std::max(env.from, 1.0) * 1e8;
  const double bottom = top * 1e-12;
  auto objective = [&](double t) { return std::pow(t, q) * measure.tail(t); };
  constexpr int kGrid = 4000;
  const double ratio = std::pow(top / bottom, 1.0 / kGrid);
  double best = 0.0;
  int best_k = 0;
  double t = bottom;
  for (int k = 0; k <= kGrid; ++k, t *= ratio) {
    const double v = objective(t);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  // Golden-section refinement around the best grid point.
  double lo = bottom * std::pow(ratio, std::max(0, best_k - 1));
  double hi = bottom * std::pow(ratio, std::min(kGrid, best_k + 1));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double x1 = hi - phi * (hi - lo);
    const double x2 = lo + phi * (hi - lo);
    if (objective(x1) >= objective(x2)) {
      hi = x2;
    } else {
      lo = x1;
    }
    best = std::max({best, objective(x1), objective(x2)});
  }
  if (q == env.exponent) best = std::max(best, env.constant);
  return best;
}

}  // namespace quadrature

double weak_moment(const AnalyticMeasure& measure, double q) {
  if (q < 1.0) throw InputError("weak_moment: q must be >= 1");
  if (auto v = measure.closed_weak_moment(q)) return *v;
  return quadrature::weak_moment(measure, q);
}

double strong_moment(const AnalyticMeasure& measure, double q) {
  if (q < 1.0) throw InputError("strong_moment: q must be >= 1");
  if (auto v = measure.closed_strong_moment(q)) return *v;
  return quadrature::strong_moment(measure, q);
}

double sqrt_tail_integral(const AnalyticMeasure& measure, double p) {
  if (p < 1.0) throw InputError("sqrt_tail_integral: p must be >= 1");
  if (auto v = measure.closed_sqrt_tail_integral(p)) return *v;
  return quadrature::sqrt_tail_integral(measure, p);
}

double upper_tail_moment(const AnalyticMeasure& measure, double p,
                         double threshold) {
  const double h = measure.tail(threshold);
  if (h == 0.0) return 0.0;
  const double rest =
      quadrature::tail_power_integral(measure, p - 1.0, 1.0, threshold);
  return std::pow(threshold, p) * h + p * rest;
}

}  // namespace empwass
