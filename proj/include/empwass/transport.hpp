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

#ifndef EMPWASS_TRANSPORT_HPP_
#define EMPWASS_TRANSPORT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "empwass/kernels.hpp"
#include "empwass/measures.hpp"

namespace empwass {

enum class TransportMethod { kExact1d, kAssignment, kEntropic };
std::string to_string(TransportMethod method);

struct Flow {
  std::size_t source;
  std::size_t target;
  double mass;
};

struct DenseCoupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;  // row-major
};

// Source i is sent to target permutation[i] (equal-size uniform case).
using Permutation = std::vector<std::size_t>;

struct TransportPlan {
  // monostate: the plan was too large to materialize.
  std::variant<std::monostate, Permutation, std::vector<Flow>, DenseCoupling>
      pairing;
  double cost = 0.0;
  TransportMethod method = TransportMethod::kExact1d;
};

// value is W_p^p.
struct TransportResult {
  double value = 0.0;
  TransportPlan plan;
};

struct EntropicResult {
  double value = 0.0;
  TransportPlan plan;
  bool converged = false;
  // L1 violation of the source marginal before rounding.
  double marginal_error = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  // Exact assignment used up to this many atoms per side.
  std::size_t exact_threshold = 512;
  // Hard cap for the O(n^3) assignment solver.
  std::size_t assignment_cap = 2048;
  // Entropic fallback: epsilon = epsilon_factor * median pairwise cost.
  double epsilon_factor = 0.05;
  int max_iter = 2000;
  double tolerance = 1e-6;
  kernels::Backend backend = kernels::Backend::kOpenMP;
};

TransportResult wasserstein_1d(const EmpiricalMeasure& x,
                               const EmpiricalMeasure& y, double p);

TransportResult wasserstein_assignment(const EmpiricalMeasure& x,
                                       const EmpiricalMeasure& y, double p,
                                       std::size_t cap = 2048);

EntropicResult wasserstein_entropic(
    const EmpiricalMeasure& x, const EmpiricalMeasure& y, double p,
    double epsilon, int max_iter, double tolerance = 1e-6,
    kernels::Backend backend = kernels::Backend::kOpenMP);

// Exact 1-D sweep in d = 1, exact assignment up to the threshold, entropic
// beyond it. Unequal sizes that divide each other are expanded to equal
// sizes by repeating atoms.
TransportResult wasserstein(const EmpiricalMeasure& x,
                            const EmpiricalMeasure& y, double p,
                            const SolverOptions& options = {});

// W_p^p(x, mu) for d = 1 by integrating against the quantile function of mu.
double wasserstein_1d_quantile(const EmpiricalMeasure& x,
                               const AnalyticMeasure& mu, double p);

struct SemidiscreteEstimate {
  double value = 0.0;
  double stderr_proxy = 0.0;
};

// W_p^p(x, mu): exact quantile route in d = 1, otherwise the mean over three
// fresh reference samples of size oversample * n with half-spread as proxy.
SemidiscreteEstimate semidiscrete_wp(const EmpiricalMeasure& x,
                                     const AnalyticMeasure& mu, double p,
                                     std::size_t oversample,
                                     std::uint64_t seed,
                                     const SolverOptions& options = {});

// |mean |X_k|_2 - E|X|_2|, a lower bound on W_1(x, mu).
double dual_lipschitz_lower_bound(const EmpiricalMeasure& x,
                                  const AnalyticMeasure& mu);

// Re-evaluates the cost of a stored pairing.
double plan_cost(const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                 double p, const TransportPlan& plan);
// Max absolute violation of either marginal.
double plan_marginal_violation(const EmpiricalMeasure& x,
                               const EmpiricalMeasure& y,
                               const TransportPlan& plan);

double median_pairwise_cost(const EmpiricalMeasure& x,
                            const EmpiricalMeasure& y, double p);

}  // namespace empwass

#endif  // EMPWASS_TRANSPORT_HPP_
