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

#include "empwass/transport.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "empwass/errors.hpp"

namespace empwass {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(const EmpiricalMeasure& x, const EmpiricalMeasure& y) {
  if (x.dim() != y.dim()) throw InputError("dimension mismatch");
  if (x.empty() || y.empty()) throw InputError("empty empirical measure");
}

void require_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InputError("transport order p must be finite and >= 1");
  }
}

double pair_cost(std::span<const double> a, std::span<const double> b,
                 double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return std::pow(std::sqrt(s), p);
}

std::vector<std::size_t> sorted_order(const EmpiricalMeasure& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&x](std::size_t a, std::size_t b) {
                     return x.point(a)[0] < x.point(b)[0];
                   });
  return order;
}

// Shortest augmenting path assignment with dual potentials (Hungarian
// method, Jonker-Volgenant form). cost is n x n row-major. Returns the column
// assigned to each row; ties resolve to the lowest column index.
Permutation solve_assignment(std::span<const double> cost, std::size_t n) {
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0);  // owner[j]: row of column j
  std::vector<std::size_t> way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);

  // Column reduction: v[j] = min_i cost(i, j).
  for (std::size_t j = 1; j <= n; ++j) {
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, cost[i * n + j - 1]);
    v[j] = best;
  }

  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      const double* row = cost.data() + (i0 - 1) * n;
      const double ui = u[i0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - ui - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Permutation assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[owner[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

std::string to_string(TransportMethod method) {
  switch (method) {
    case TransportMethod::kExact1d:
      return "exact-1d";
    case TransportMethod::kAssignment:
      return "assignment";
    case TransportMethod::kEntropic:
      return "entropic";
  }
  return "unknown";
}

TransportResult wasserstein_1d(const EmpiricalMeasure& x,
                               const EmpiricalMeasure& y, double p) {
  require_same_dim(x, y);
  require_order(p);
  if (x.dim() != 1) throw InputError("wasserstein_1d: dimension mismatch, need d = 1");

  const auto ox = sorted_order(x);
  const auto oy = sorted_order(y);
  TransportResult result;
  result.plan.method = TransportMethod::kExact1d;

  if (x.size() == y.size() && x.has_uniform_weights() &&
      y.has_uniform_weights()) {
    Permutation perm(x.size());
    double total = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      perm[ox[k]] = oy[k];
      total += std::pow(std::abs(x.point(ox[k])[0] - y.point(oy[k])[0]), p);
    }
    result.value = total / static_cast<double>(x.size());
    result.plan.cost = result.value;
    result.plan.pairing = std::move(perm);
    return result;
  }

  // Merged quantile sweep for general weights.
  std::vector<Flow> flows;
  std::size_t i = 0;
  std::size_t j = 0;
  double left_x = x.weight(ox[0]);
  double left_y = y.weight(oy[0]);
  double total = 0.0;
  while (i < x.size() && j < y.size()) {
    const bool last_x = i + 1 == x.size();
    const bool last_y = j + 1 == y.size();
    double mass = std::min(left_x, left_y);
    // The final atoms absorb rounding residue.
    if (last_x && last_y) mass = std::max(left_x, left_y);
    if (mass > 0.0) {
      flows.push_back({ox[i], oy[j], mass});
      total += mass * std::pow(std::abs(x.point(ox[i])[0] - y.point(oy[j])[0]), p);
    }
    left_x -= mass;
    left_y -= mass;
    if (last_x && last_y) break;
    const bool advance_x = !last_x && (left_x <= left_y || last_y);
    if (advance_x) {
      ++i;
      left_x = x.weight(ox[i]);
    } else {
      ++j;
      left_y = y.weight(oy[j]);
    }
  }
  result.value = total;
  result.plan.cost = total;
  result.plan.pairing = std::move(flows);
  return result;
}

TransportResult wasserstein_assignment(const EmpiricalMeasure& x,
                                       const EmpiricalMeasure& y, double p,
                                       std::size_t cap) {
  require_same_dim(x, y);
  require_order(p);
  if (x.size() != y.size() || !x.has_uniform_weights() ||
      !y.has_uniform_weights()) {
    throw InputError(
        "assignment solver needs equal sizes and uniform weights; use the "
        "entropic solver");
  }
  const std::size_t n = x.size();
  if (n > cap) {
    throw Refusal("assignment solver refuses n = " + std::to_string(n) +
                  " above cap " + std::to_string(cap));
  }
  std::vector<double> cost(n * n);
  kernels::cost_matrix(x, y, p, cost, kernels::Backend::kSerial);
  Permutation perm = solve_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + perm[i]];
  TransportResult result;
  result.value = total / static_cast<double>(n);
  result.plan.method = TransportMethod::kAssignment;
  result.plan.cost = result.value;
  result.plan.pairing = std::move(perm);
  return result;
}

EntropicResult wasserstein_entropic(const EmpiricalMeasure& x,
                                    const EmpiricalMeasure& y, double p,
                                    double epsilon, int max_iter,
                                    double tolerance,
                                    kernels::Backend backend) {
  require_same_dim(x, y);
  require_order(p);
  if (!(epsilon > 0.0)) throw InputError("entropic solver: epsilon must be > 0");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  constexpr std::size_t kDenseLimit = 2048 * 2048;
  const bool dense = n * m <= kDenseLimit;

  std::vector<double> cost;
  std::vector<double> cost_t;
  kernels::CostView rows_view;
  kernels::CostView cols_view;
  if (dense) {
    cost.resize(n * m);
    kernels::cost_matrix(x, y, p, cost, backend);
    cost_t.resize(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) cost_t[j * n + i] = cost[i * m + j];
    }
    rows_view = kernels::CostView::dense(cost, n, m);
    cols_view = kernels::CostView::dense(cost_t, m, n);
  } else {
    rows_view = kernels::CostView::streamed(x, y, p);
    cols_view = kernels::CostView::streamed(y, x, p);
  }

  std::vector<double> log_a(n);
  std::vector<double> log_b(m);
  for (std::size_t i = 0; i < n; ++i) log_a[i] = std::log(x.weight(i));
  for (std::size_t j = 0; j < m; ++j) log_b[j] = std::log(y.weight(j));

  std::vector<double> f(n, 0.0);
  std::vector<double> g(m, 0.0);
  std::vector<double> row_sum(n);
  EntropicResult result;
  auto row_error = [&]() {
    kernels::plan_row_sums(rows_view, f, g, epsilon, row_sum, backend);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err += std::abs(row_sum[i] - x.weight(i));
    return err;
  };
  constexpr int kCheckEvery = 5;
  int it = 0;
  double err = kInf;
  for (; it < max_iter; ++it) {
    kernels::soft_min_rows(rows_view, g, epsilon, f, backend);
    for (std::size_t i = 0; i < n; ++i) f[i] += epsilon * log_a[i];
    kernels::soft_min_rows(cols_view, f, epsilon, g, backend);
    for (std::size_t j = 0; j < m; ++j) g[j] += epsilon * log_b[j];
    if ((it + 1) % kCheckEvery == 0) {
      err = row_error();
      if (err < tolerance) {
        ++it;
        break;
      }
    }
  }
  err = row_error();
  result.iterations = it;
  result.marginal_error = err;
  result.converged = err < tolerance;

  // Round onto the feasible set: scale rows down to the source marginal,
  // columns down to the target marginal, then add the rank-one correction.
  std::vector<double> row_shift(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s =
        row_sum[i] > 0.0 ? std::min(x.weight(i) / row_sum[i], 1.0) : 1.0;
    row_shift[i] = f[i] + (s > 0.0 ? epsilon * std::log(s) : -kInf);
  }
  std::vector<double> col_sum(m);
  kernels::plan_row_sums(cols_view, g, row_shift, epsilon, col_sum, backend);
  std::vector<double> col_shift(m);
  std::vector<double> err_c(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t =
        col_sum[j] > 0.0 ? std::min(y.weight(j) / col_sum[j], 1.0) : 1.0;
    col_shift[j] = g[j] + (t > 0.0 ? epsilon * std::log(t) : -kInf);
    err_c[j] = std::max(0.0, y.weight(j) - t * col_sum[j]);
  }
  std::vector<double> rounded_rows(n);
  kernels::plan_row_sums(rows_view, row_shift, col_shift, epsilon,
                         rounded_rows, backend);
  std::vector<double> err_r(n);
  double err_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err_r[i] = std::max(0.0, x.weight(i) - rounded_rows[i]);
    err_norm += err_r[i];
  }

  std::vector<double> per_row(n);
  kernels::plan_row_costs(rows_view, row_shift, col_shift, epsilon, per_row,
                          backend);
  double total = 0.0;
  for (double v : per_row) total += v;
  if (err_norm > 0.0) {
    std::vector<double> correction(n);
    kernels::weighted_row_costs(rows_view, err_c, correction, backend);
    double extra = 0.0;
    for (std::size_t i = 0; i < n; ++i) extra += err_r[i] * correction[i];
    total += extra / err_norm;
  }
  result.value = total;
  result.plan.method = TransportMethod::kEntropic;
  result.plan.cost = total;

  if (dense) {
    DenseCoupling coupling{n, m, std::vector<double>(n * m)};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double mass = std::exp((row_shift[i] + col_shift[j] - cost[i * m + j]) /
                               epsilon);
        if (err_norm > 0.0) mass += err_r[i] * err_c[j] / err_norm;
        coupling.mass[i * m + j] = mass;
      }
    }
    result.plan.pairing = std::move(coupling);
  }
  return result;
}

double median_pairwise_cost(const EmpiricalMeasure& x,
                            const EmpiricalMeasure& y, double p) {
  require_same_dim(x, y);
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t total = n * m;
  constexpr std::size_t kMaxSamples = 1 << 20;
  const std::size_t stride = std::max<std::size_t>(1, total / kMaxSamples);
  std::vector<double> costs;
  costs.reserve(std::min(total, kMaxSamples + 1));
  for (std::size_t k = 0; k < total; k += stride) {
    costs.push_back(pair_cost(x.point(k / m), y.point(k % m), p));
  }
  auto mid = costs.begin() + static_cast<std::ptrdiff_t>(costs.size() / 2);
  std::nth_element(costs.begin(), mid, costs.end());
  return *mid;
}

TransportResult wasserstein(const EmpiricalMeasure& x,
                            const EmpiricalMeasure& y, double p,
                            const SolverOptions& options) {
  require_same_dim(x, y);
  require_order(p);
  if (x.dim() == 1) return wasserstein_1d(x, y, p);

  const bool uniform = x.has_uniform_weights() && y.has_uniform_weights();
  if (uniform) {
    const std::size_t small = std::min(x.size(), y.size());
    const std::size_t large = std::max(x.size(), y.size());
    if (large % small == 0 && large <= options.exact_threshold &&
        large <= options.assignment_cap) {
      const std::size_t times = large / small;
      if (x.size() == y.size()) {
        return wasserstein_assignment(x, y, p, options.assignment_cap);
      }
      if (x.size() < y.size()) {
        return wasserstein_assignment(x.replicate_atoms(times), y, p,
                                      options.assignment_cap);
      }
      return wasserstein_assignment(x, y.replicate_atoms(times), p,
                                    options.assignment_cap);
    }
  }
  if (x.size() == 1 || y.size() == 1) {
    // A single atom admits exactly one coupling.
    TransportResult result;
    std::vector<Flow> flows;
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double mass = x.weight(i) * y.weight(j);
        flows.push_back({i, j, mass});
        total += mass * pair_cost(x.point(i), y.point(j), p);
      }
    }
    result.value = total;
    result.plan.cost = total;
    result.plan.method = TransportMethod::kAssignment;
    result.plan.pairing = std::move(flows);
    return result;
  }
  const double eps = options.epsilon_factor * median_pairwise_cost(x, y, p);
  EntropicResult e = wasserstein_entropic(
      x, y, p, eps > 0.0 ? eps : 1e-12, options.max_iter, options.tolerance,
      options.backend);
  return {e.value, std::move(e.plan)};
}

double wasserstein_1d_quantile(const EmpiricalMeasure& x,
                               const AnalyticMeasure& mu, double p) {
  require_order(p);
  if (x.dim() != 1 || mu.dim() != 1 || !mu.has_quantile()) {
    throw InputError("quantile route needs one-dimensional measures");
  }
  const auto order = sorted_order(x);
  boost::math::quadrature::tanh_sinh<double> integrator;
  double total = 0.0;
  double low = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double value = x.point(order[k])[0];
    const double high =
        k + 1 == order.size() ? 1.0 : std::min(1.0, low + x.weight(order[k]));
    if (high <= low) continue;
    const double split = std::clamp(mu.cdf(value), low, high);
    const auto g_low = mu.quantile_integral(low);
    const auto g_split = mu.quantile_integral(split);
    const auto g_high = mu.quantile_integral(high);
    if (p == 1.0 && g_low && g_split && g_high) {
      total += value * (split - low) - (*g_split - *g_low) +
               (*g_high - *g_split) - value * (high - split);
    } else {
      auto below = [&](double u) { return std::pow(std::max(0.0, value - mu.quantile(u)), p); };
      auto above = [&](double u) { return std::pow(std::max(0.0, mu.quantile(u) - value), p); };
      if (split > low) total += integrator.integrate(below, low, split);
      if (high > split) total += integrator.integrate(above, split, high);
    }
    low = high;
  }
  return std::max(0.0, total);
}

SemidiscreteEstimate semidiscrete_wp(const EmpiricalMeasure& x,
                                     const AnalyticMeasure& mu, double p,
                                     std::size_t oversample,
                                     std::uint64_t seed,
                                     const SolverOptions& options) {
  if (x.dim() != mu.dim()) throw InputError("dimension mismatch");
  if (oversample < 2) throw InputError("semidiscrete: oversample must be >= 2");
  if (x.dim() == 1 && mu.has_quantile()) {
    return {wasserstein_1d_quantile(x, mu, p), 0.0};
  }
  const std::size_t m = oversample * x.size();
  double values[3];
  for (int r = 0; r < 3; ++r) {
    const EmpiricalMeasure ref = sample(mu, m, seed, static_cast<std::uint64_t>(r));
    values[r] = wasserstein(x, ref, p, options).value;
  }
  const auto [lo, hi] = std::minmax({values[0], values[1], values[2]});
  return {(values[0] + values[1] + values[2]) / 3.0, 0.5 * (hi - lo)};
}

double dual_lipschitz_lower_bound(const EmpiricalMeasure& x,
                                  const AnalyticMeasure& mu) {
  if (x.dim() != mu.dim()) throw InputError("dimension mismatch");
  const auto mean = mu.mean_euclidean_norm();
  if (!mean) {
    throw InputError("mean euclidean norm of " + mu.spec() + " is unavailable");
  }
  if (!std::isfinite(*mean)) {
    throw Refusal("mean euclidean norm of " + mu.spec() + " is infinite");
  }
  double sample_mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sample_mean += x.weight(i) * euclidean_norm(x.point(i));
  }
  return std::abs(sample_mean - *mean);
}

double plan_cost(const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                 double p, const TransportPlan& plan) {
  struct Visitor {
    const EmpiricalMeasure& x;
    const EmpiricalMeasure& y;
    double p;
    double operator()(const std::monostate&) const { return kInf; }
    double operator()(const Permutation& perm) const {
      double total = 0.0;
      for (std::size_t i = 0; i < perm.size(); ++i) {
        total += x.weight(i) * pair_cost(x.point(i), y.point(perm[i]), p);
      }
      return total;
    }
    double operator()(const std::vector<Flow>& flows) const {
      double total = 0.0;
      for (const Flow& f : flows) {
        total += f.mass * pair_cost(x.point(f.source), y.point(f.target), p);
      }
      return total;
    }
    double operator()(const DenseCoupling& c) const {
      double total = 0.0;
      for (std::size_t i = 0; i < c.rows; ++i) {
        for (std::size_t j = 0; j < c.cols; ++j) {
          total += c.mass[i * c.cols + j] * pair_cost(x.point(i), y.point(j), p);
        }
      }
      return total;
    }
  };
  return std::visit(Visitor{x, y, p}, plan.pairing);
}

double plan_marginal_violation(const EmpiricalMeasure& x,
                               const EmpiricalMeasure& y,
                               const TransportPlan& plan) {
  std::vector<double> rows(x.size(), 0.0);
  std::vector<double> cols(y.size(), 0.0);
  struct Visitor {
    const EmpiricalMeasure& x;
    std::vector<double>& rows;
    std::vector<double>& cols;
    bool operator()(const std::monostate&) const { return false; }
    bool operator()(const Permutation& perm) const {
      for (std::size_t i = 0; i < perm.size(); ++i) {
        rows[i] += x.weight(i);
        cols[perm[i]] += x.weight(i);
      }
      return true;
    }
    bool operator()(const std::vector<Flow>& flows) const {
      for (const Flow& f : flows) {
        rows[f.source] += f.mass;
        cols[f.target] += f.mass;
      }
      return true;
    }
    bool operator()(const DenseCoupling& c) const {
      for (std::size_t i = 0; i < c.rows; ++i) {
        for (std::size_t j = 0; j < c.cols; ++j) {
          rows[i] += c.mass[i * c.cols + j];
          cols[j] += c.mass[i * c.cols + j];
        }
      }
      return true;
    }
  };
  if (!std::visit(Visitor{x, rows, cols}, plan.pairing)) return kInf;
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max(worst, std::abs(rows[i] - x.weight(i)));
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    worst = std::max(worst, std::abs(cols[j] - y.weight(j)));
  }
  return worst;
}

}  // namespace empwass
