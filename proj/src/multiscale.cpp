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

#include "empwass/multiscale.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "empwass/errors.hpp"

namespace empwass {

namespace {

using CellCoords = std::vector<std::uint32_t>;

struct CellTally {
  double mass = 0.0;
  std::size_t count = 0;
};

// (a, b] intersected with [-M, M]; empty results have hi < lo.
Interval clip_to_cube(const Interval& iv, double half_width) {
  Interval out;
  if (iv.lo < -half_width) {
    out.lo = -half_width;
    out.lo_closed = true;
  } else {
    out.lo = iv.lo;
    out.lo_closed = iv.lo_closed;
  }
  out.hi = std::min(iv.hi, half_width);
  if (out.hi < out.lo || (out.hi == out.lo && !out.lo_closed)) {
    out.hi = -std::numeric_limits<double>::infinity();
  }
  return out;
}

bool is_empty(const Interval& iv) {
  return iv.hi < iv.lo || (iv.hi == iv.lo && !iv.lo_closed);
}

double region_box_mass(const AnalyticMeasure& mu, std::vector<Interval> box,
                       Region region, double half_width) {
  for (const Interval& iv : box) {
    if (is_empty(iv)) return 0.0;
  }
  if (region == Region::kAll) return mu.box_mass(box);
  std::vector<Interval> clipped(box.size());
  bool empty = false;
  for (std::size_t k = 0; k < box.size(); ++k) {
    clipped[k] = clip_to_cube(box[k], half_width);
    empty = empty || is_empty(clipped[k]);
  }
  const double inside = empty ? 0.0 : mu.box_mass(clipped);
  if (region == Region::kInsideCube) return inside;
  return std::max(0.0, mu.box_mass(box) - inside);
}

double cell_mass_raw(const AnalyticMeasure& mu, int m, int level,
                     std::span<const std::uint32_t> cell, Region region,
                     double half_width) {
  std::vector<Interval> box(cell.size());
  for (std::size_t k = 0; k < cell.size(); ++k) {
    box[k] = {cell_lower(cell[k], m, level), cell_upper(cell[k], m, level),
              false};
  }
  double mass = region_box_mass(mu, box, region, half_width);
  if (m >= 1 && mass > 0.0) {
    const double h = std::ldexp(1.0, m - 1);
    std::vector<Interval> inner(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) {
      inner[k] = {std::max(box[k].lo, -h), std::min(box[k].hi, h), false};
    }
    mass -= region_box_mass(mu, inner, region, half_width);
  }
  return std::max(0.0, mass);
}

// Sum over level-l cells of |sample - reference|, the unoccupied cells
// contributing reference block mass minus the reference mass of occupied
// cells. When normalize is set both measures are divided by their block
// masses.
struct LevelSums {
  double absolute = 0.0;
  double normalized = 0.0;
  std::size_t count = 0;
};

LevelSums level_sums(const AnalyticMeasure& mu, int m, int level,
                     const std::map<CellCoords, CellTally>& cells,
                     double sample_block, double reference_block,
                     Region region, double half_width) {
  LevelSums sums;
  double occupied_reference = 0.0;
  double normalized = 0.0;
  const bool normalize = sample_block > 0.0 && reference_block > 0.0;
  for (const auto& [coords, tally] : cells) {
    const double r = cell_mass_raw(mu, m, level, coords, region, half_width);
    occupied_reference += r;
    sums.absolute += std::abs(tally.mass - r);
    sums.count += tally.count;
    if (normalize) {
      normalized += std::abs(tally.mass / sample_block - r / reference_block);
    }
  }
  sums.absolute += std::max(0.0, reference_block - occupied_reference);
  if (normalize) {
    normalized += std::max(0.0, 1.0 - occupied_reference / reference_block);
    sums.normalized = normalized;
  }
  return sums;
}

std::map<CellCoords, CellTally> coarsen(
    const std::map<CellCoords, CellTally>& finest, int shift) {
  if (shift == 0) return finest;
  std::map<CellCoords, CellTally> out;
  for (const auto& [coords, tally] : finest) {
    CellCoords key(coords);
    for (auto& c : key) c >>= shift;
    CellTally& slot = out[key];
    slot.mass += tally.mass;
    slot.count += tally.count;
  }
  return out;
}

struct RegionResult {
  std::vector<BlockTerms> blocks;
  double total = 0.0;  // truncated Delta over this region
};

}  // namespace

DyadicCellKey cell_key(std::span<const double> x, int m, int level,
                       CellConvention convention) {
  if (level < 0 || m < 0) throw InputError("cell_key: m and level must be >= 0");
  if (block_index(x) != m) {
    throw InputError("cell_key: point is not in block B_" + std::to_string(m));
  }
  DyadicCellKey key{m, level, {}};
  key.cell.reserve(x.size());
  for (double v : x) key.cell.push_back(cell_coordinate(v, m, level, convention));
  return key;
}

double cell_mass(const AnalyticMeasure& mu, const DyadicCellKey& key,
                 Region region, double cube_half_width) {
  if (key.cell.size() != mu.dim()) throw InputError("cell_mass: dimension mismatch");
  const std::uint32_t top = std::uint32_t{1} << key.level;
  for (auto c : key.cell) {
    if (c >= top) throw InputError("cell_mass: cell coordinate out of range");
  }
  return cell_mass_raw(mu, key.m, key.level, key.cell, region, cube_half_width);
}

double block_mass(const AnalyticMeasure& mu, int m) {
  return cell_mass(mu, DyadicCellKey{m, 0, CellCoords(mu.dim(), 0)});
}

int default_m_max(const AnalyticMeasure& reference) {
  for (int m = 0; m < 60; ++m) {
    if (reference.tail(std::ldexp(1.0, m - 1)) <= 1e-6) return m;
  }
  return 60;
}

int default_l_max(std::size_t dim) {
  if (dim <= 2) return 10;
  if (dim == 3) return 6;
  return 4;
}

double lemma_ratio(double p) {
  return std::max(1.5, 0.5 * (std::pow(2.0, p) - 1.0));
}

double default_cube_half_width(std::size_t n, double x, double p,
                               std::size_t dim, bool small_dimension) {
  const double nn = static_cast<double>(n);
  if (small_dimension) return std::pow(nn * x, 1.0 / p);
  return std::pow(nn, 1.0 / static_cast<double>(dim)) * std::pow(x, 1.0 / p);
}

MultiscaleProfile delta_p(const EmpiricalMeasure& sample,
                          const AnalyticMeasure& reference, double p,
                          int m_max, int l_max,
                          std::optional<double> cube_half_width,
                          const MultiscaleOptions& options) {
  if (sample.dim() != reference.dim()) throw InputError("dimension mismatch");
  if (!reference.has_box_mass()) {
    throw InputError("reference " + reference.spec() + " has no cell-mass oracle");
  }
  if (m_max < 0 || l_max < 0) throw InputError("m_max and l_max must be >= 0");
  if (l_max > 30) throw InputError("l_max must be <= 30");
  if (!(p >= 1.0)) throw InputError("p must be >= 1");
  if (cube_half_width && !(*cube_half_width > 0.0)) {
    throw InputError("truncation M must be > 0");
  }
  const std::size_t d = sample.dim();
  const std::size_t n = sample.size();

  std::vector<int> blocks(n);
  std::vector<std::uint32_t> cells(n * d);
  kernels::dyadic_locate(sample, l_max, blocks, cells, options.convention,
                         options.backend);

  MultiscaleProfile profile;
  profile.p = p;
  profile.m_max = m_max;
  profile.l_max = l_max;
  profile.cube_half_width = cube_half_width;

  const double half_width = cube_half_width.value_or(0.0);
  auto run_region = [&](Region region) {
    std::vector<std::map<CellCoords, CellTally>> finest(
        static_cast<std::size_t>(m_max) + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const int m = blocks[i];
      if (m > m_max) continue;
      if (region != Region::kAll) {
        const bool inside = max_norm(sample.point(i)) <= half_width;
        if (inside != (region == Region::kInsideCube)) continue;
      }
      CellCoords key(cells.begin() + static_cast<std::ptrdiff_t>(i * d),
                     cells.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
      CellTally& slot = finest[static_cast<std::size_t>(m)][key];
      slot.mass += sample.weight(i);
      slot.count += 1;
    }
    RegionResult result;
    for (int m = 0; m <= m_max; ++m) {
      const auto& top = finest[static_cast<std::size_t>(m)];
      BlockTerms terms;
      terms.m = m;
      for (const auto& [coords, tally] : top) {
        terms.sample_mass += tally.mass;
        terms.sample_count += tally.count;
      }
      terms.reference_mass =
          cell_mass_raw(reference, m, 0, CellCoords(d, 0), region, half_width);
      double block_sum = 0.0;
      for (int level = 0; level <= l_max; ++level) {
        const auto level_cells = coarsen(top, l_max - level);
        const LevelSums sums =
            level_sums(reference, m, level, level_cells, terms.sample_mass,
                       terms.reference_mass, region, half_width);
        terms.cell_discrepancy.push_back(sums.absolute);
        terms.normalized_discrepancy.push_back(sums.normalized);
        terms.cell_counts.push_back(sums.count);
        block_sum += std::pow(2.0, -p * level) * sums.absolute;
      }
      result.total += std::pow(2.0, p * m) * block_sum;
      result.blocks.push_back(std::move(terms));
    }
    return result;
  };

  RegionResult all = run_region(Region::kAll);
  profile.delta_p = all.total;

  // D_p: block term plus normalized cell term.
  const double inner_factor = 0.5 * (std::pow(2.0, p) - 1.0);
  double dp = 0.0;
  double d_tail = 0.0;
  double l_tail = 0.0;
  const double level_tail = std::pow(2.0, -p * (l_max + 1)) /
                            (1.0 - std::pow(2.0, -p));
  for (const BlockTerms& b : all.blocks) {
    const double scale = std::pow(2.0, p * b.m);
    double inner = 0.0;
    for (int level = 1; level <= l_max; ++level) {
      inner += std::pow(2.0, -p * level) *
               b.normalized_discrepancy[static_cast<std::size_t>(level)];
    }
    const double low = std::min(b.sample_mass, b.reference_mass);
    dp += scale * std::abs(b.sample_mass - b.reference_mass) +
          scale * low * inner_factor * inner;
    l_tail += scale * (b.sample_mass + b.reference_mass) * level_tail;
    d_tail += scale * low * std::pow(2.0, -p * l_max);
  }
  profile.d_p = dp;

  // Blocks beyond m_max: sample part exactly, reference part through
  // 2^(pm) < 2^p |x|^p on B_m.
  double beyond_sample = 0.0;
  double beyond_weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (blocks[i] > m_max) {
      beyond_sample += sample.weight(i);
      beyond_weighted += sample.weight(i) * std::pow(2.0, p * blocks[i]);
    }
  }
  const double beyond_reference =
      std::pow(2.0, p) * upper_tail_moment(reference, p, std::ldexp(1.0, m_max));
  const double beyond = beyond_weighted + beyond_reference;
  profile.sample_mass_beyond = beyond_sample;
  profile.tail_bound = l_tail + beyond / (1.0 - std::pow(2.0, -p));
  profile.d_tail_bound = d_tail + 2.0 * beyond;
  profile.per_block = std::move(all.blocks);

  if (cube_half_width) {
    profile.a_pm = run_region(Region::kInsideCube).total;
    profile.b_pm = run_region(Region::kOutsideCube).total;
  }
  return profile;
}

FunctionalValue d_p_functional(const EmpiricalMeasure& sample,
                               const AnalyticMeasure& reference, double p,
                               int m_max, int l_max) {
  const MultiscaleProfile profile = delta_p(sample, reference, p, m_max, l_max);
  return {profile.d_p, profile.d_tail_bound};
}

KappaStats empirical_kappa(std::span<const KappaObservation> observations,
                           double significance) {
  if (observations.size() < 5) {
    throw InputError("empirical_kappa needs at least 5 observations");
  }
  std::vector<double> ratios;
  std::vector<double> logs;
  for (const KappaObservation& o : observations) {
    if (o.dp == 0.0) {
      if (o.wp > 0.0) {
        throw std::logic_error(
            "D_p = 0 while W_p^p > 0 at n = " + std::to_string(o.n) +
            ": contradicts W_p^p <= kappa D_p");
      }
      continue;
    }
    ratios.push_back(o.wp / o.dp);
    logs.push_back(std::log(static_cast<double>(o.n)));
  }
  KappaStats stats;
  stats.count = ratios.size();
  if (ratios.empty()) return stats;
  stats.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  std::vector<double> sorted(ratios);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();
  stats.median_ratio =
      k % 2 == 1 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);

  if (k < 3) return stats;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += logs[i];
    my += ratios[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (logs[i] - mx) * (logs[i] - mx);
    sxy += (logs[i] - mx) * (ratios[i] - my);
  }
  if (sxx == 0.0) return stats;
  stats.trend_slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double fit = my + stats.trend_slope * (logs[i] - mx);
    rss += (ratios[i] - fit) * (ratios[i] - fit);
  }
  const double dof = static_cast<double>(k) - 2.0;
  stats.trend_stderr = std::sqrt(rss / dof / sxx);
  if (stats.trend_stderr == 0.0) {
    stats.trend_p_value = stats.trend_slope > 0.0 ? 0.0 : 1.0;
  } else {
    const boost::math::students_t dist(dof);
    stats.trend_p_value =
        boost::math::cdf(boost::math::complement(dist, stats.trend_slope /
                                                           stats.trend_stderr));
  }
  stats.positive_trend =
      stats.trend_slope > 0.0 && stats.trend_p_value < significance;
  return stats;
}

}  // namespace empwass
