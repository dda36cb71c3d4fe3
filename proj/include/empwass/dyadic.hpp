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

#ifndef EMPWASS_DYADIC_HPP_
#define EMPWASS_DYADIC_HPP_

// Dyadic geometry in the max-norm. Block B_0 = (-1, 1]^d and, for m >= 1,
// B_m = (-2^m, 2^m]^d minus (-2^(m-1), 2^(m-1)]^d. Level-l cells split the
// rescaled cube (-1, 1]^d into 2^(d l) translates of (-2^-l, 2^-l]^d.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace empwass {

// Which face of a cell owns a shared boundary point. Cells are lower-open
// and upper-closed; the other value exists only for fault injection.
enum class CellConvention { kUpperClosed, kLowerClosed };

struct DyadicCellKey {
  int m = 0;
  int level = 0;
  std::vector<std::uint32_t> cell;

  friend bool operator==(const DyadicCellKey&, const DyadicCellKey&) = default;
};

// Unique m with x in B_m.
inline int block_index(std::span<const double> x) {
  int m = 0;
  for (double v : x) {
    if (v == 0.0) continue;
    int e = 0;
    const double f = std::frexp(std::abs(v), &e);
    // |v| = f * 2^e, f in [0.5, 1).
    int need = 0;
    if (v > 0.0) {
      need = (f == 0.5) ? e - 1 : e;  // smallest m with 2^m >= v
    } else {
      need = e;  // smallest m with 2^m > -v
    }
    m = std::max(m, need);
  }
  return m;
}

// Level-l cell coordinate of one coordinate of a point in block m.
inline std::uint32_t cell_coordinate(double v, int m, int level,
                                     CellConvention conv =
                                         CellConvention::kUpperClosed) {
  const double scaled = std::ldexp(v, -m);
  const double pos = std::ldexp(scaled + 1.0, level - 1);
  double c = conv == CellConvention::kUpperClosed ? std::ceil(pos) - 1.0
                                                  : std::floor(pos);
  const double top = std::ldexp(1.0, level) - 1.0;
  c = std::clamp(c, 0.0, top);
  return static_cast<std::uint32_t>(c);
}

// Lower and upper edges of coordinate c at level l in block m (unscaled).
inline double cell_lower(std::uint32_t c, int m, int level) {
  return std::ldexp(std::ldexp(static_cast<double>(c), 1 - level) - 1.0, m);
}
inline double cell_upper(std::uint32_t c, int m, int level) {
  return std::ldexp(std::ldexp(static_cast<double>(c) + 1.0, 1 - level) - 1.0,
                    m);
}

}  // namespace empwass

#endif  // EMPWASS_DYADIC_HPP_
