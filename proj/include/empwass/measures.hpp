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

#ifndef EMPWASS_MEASURES_HPP_
#define EMPWASS_MEASURES_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "empwass/rng.hpp"

namespace empwass {

// Weighted point cloud in R^d. Coordinates are stored row-major.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  // Uniform weights 1/n.
  EmpiricalMeasure(std::size_t dim, std::vector<double> coords);
  EmpiricalMeasure(std::size_t dim, std::vector<double> coords,
                   std::vector<double> weights);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const { return coords_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  bool has_uniform_weights() const { return uniform_; }

  // Points [begin, end) re-weighted uniformly.
  EmpiricalMeasure slice(std::size_t begin, std::size_t end) const;
  // Each atom repeated `times` times; same measure, more atoms.
  EmpiricalMeasure replicate_atoms(std::size_t times) const;
  EmpiricalMeasure scaled(double factor) const;
  EmpiricalMeasure translated(std::span<const double> shift) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
  bool uniform_ = true;
};

// One coordinate factor of a box: (lo, hi], or [lo, hi] when lo_closed.
struct Interval {
  double lo;
  double hi;
  bool lo_closed = false;
};

// H(t) <= constant * t^-exponent for t >= from. exponent is +inf for
// bounded support, in which case H(t) = 0 for t >= from.
struct TailEnvelope {
  double exponent;
  double constant;
  double from;
};

// Reference distribution with exact tail, sampler and (optionally) exact
// masses of half-open boxes.
class AnalyticMeasure {
 public:
  virtual ~AnalyticMeasure() = default;

  virtual std::string spec() const = 0;
  virtual std::size_t dim() const = 0;
  virtual void draw(Stream& stream, std::span<double> out) const = 0;
  // H(t) = P(|X| > t) in the max-norm.
  virtual double tail(double t) const = 0;
  virtual TailEnvelope tail_envelope() const = 0;
  // Points where H is not smooth; used to split quadratures.
  virtual std::vector<double> tail_breakpoints() const { return {}; }

  virtual bool has_box_mass() const { return false; }
  // Mass of a product of intervals, one per coordinate.
  virtual double box_mass(std::span<const Interval> box) const;

  virtual std::optional<double> closed_weak_moment(double) const {
    return std::nullopt;
  }
  virtual std::optional<double> closed_strong_moment(double) const {
    return std::nullopt;
  }
  virtual std::optional<double> closed_sqrt_tail_integral(double) const {
    return std::nullopt;
  }
  // E|X|_2 in the euclidean norm, when computable.
  virtual std::optional<double> mean_euclidean_norm() const {
    return std::nullopt;
  }

  // One-dimensional quantile interface; only meaningful when
  // has_quantile() is true.
  virtual bool has_quantile() const { return false; }
  virtual double cdf(double x) const;
  virtual double quantile(double u) const;
  // G(u) = integral of the quantile function over [0, u].
  virtual std::optional<double> quantile_integral(double u) const {
    (void)u;
    return std::nullopt;
  }
};

using MeasurePtr = std::shared_ptr<const AnalyticMeasure>;

// Parses `name:key=value,...`. Known names: uniform, uniform_sym, pareto,
// pareto_prod, dirac.
MeasurePtr parse_measure(const std::string& spec);
std::vector<std::string> catalog_names();

// Treats a point cloud as a reference measure (counting masses).
MeasurePtr atomic_measure(EmpiricalMeasure atoms);

EmpiricalMeasure sample(const AnalyticMeasure& measure, std::size_t n,
                        std::uint64_t seed, std::uint64_t stream = 0);
// Appends n draws from an existing stream.
void append_draws(const AnalyticMeasure& measure, std::size_t n,
                  Stream& stream, std::vector<double>& coords);

double tail_H(const AnalyticMeasure& measure, double t);
// The q-th powers ||X||_{q,w}^q and ||X||_q^q; +inf when infinite.
double weak_moment(const AnalyticMeasure& measure, double q);
double strong_moment(const AnalyticMeasure& measure, double q);
// integral of t^(p-1) sqrt(H(t)) over (0, inf); +inf when divergent.
double sqrt_tail_integral(const AnalyticMeasure& measure, double p);
// E[|X|^p ; |X| > threshold].
double upper_tail_moment(const AnalyticMeasure& measure, double p,
                         double threshold);

// Quadrature routes, exposed so closed forms can be checked against them.
namespace quadrature {
double strong_moment(const AnalyticMeasure& measure, double q);
double sqrt_tail_integral(const AnalyticMeasure& measure, double p);
double weak_moment(const AnalyticMeasure& measure, double q);
}  // namespace quadrature

// Empirical fraction of points with max-norm strictly above t.
double empirical_tail(const EmpiricalMeasure& x, double t);

double max_norm(std::span<const double> x);
double euclidean_norm(std::span<const double> x);

}  // namespace empwass

#endif  // EMPWASS_MEASURES_HPP_
