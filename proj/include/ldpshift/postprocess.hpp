// Copyright 2026 The ldpshift Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDPSHIFT_POSTPROCESS_HPP_
#define LDPSHIFT_POSTPROCESS_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ldpshift/core.hpp"

namespace ldpshift {

// S(alpha) = sum_i max(h_i + alpha, 0).
inline double shifted_mass(std::span<const double> h, double alpha) {
  double s = 0.0;
  for (double v : h) s += std::max(v + alpha, 0.0);
  return s;
}

/// Shift alpha with sum_i max(h_i + alpha, 0) = 1.
///
/// Procedure: bisect the nondecreasing piecewise-linear S(alpha) on
/// [-max(h) - 1, 1 - min(h)], then recompute alpha in closed form on the
/// active set found by the bisection.
inline double norm_sub_alpha(std::span<const double> h) {
  if (h.empty()) throw std::invalid_argument("norm_sub: empty histogram");
  for (double v : h) {
    if (!std::isfinite(v)) throw std::invalid_argument("norm_sub: non-finite entry");
  }
  const auto [mn, mx] = std::minmax_element(h.begin(), h.end());
  double lo = -*mx - 1.0;
  double hi = 1.0 - *mn;
  double alpha = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    alpha = 0.5 * (lo + hi);
    const double s = shifted_mass(h, alpha);
    if (std::abs(s - 1.0) < 1e-12) break;
    if (s < 1.0) {
      lo = alpha;
    } else {
      hi = alpha;
    }
    if (hi - lo <= 0.0) break;
  }
  double active_sum = 0.0;
  int active = 0;
  for (double v : h) {
    if (v + alpha > 0.0) {
      active_sum += v;
      ++active;
    }
  }
  if (active > 0) {
    const double exact = (1.0 - active_sum) / active;
    bool same_set = true;
    for (double v : h) {
      const bool was = v + alpha > 0.0;
      const bool now = v + exact > 0.0;
      if (was != now && std::abs(v + exact) > 1e-12) {
        same_set = false;
        break;
      }
    }
    if (same_set) alpha = exact;
  }
  return alpha;
}

/// Norm-Sub consistency: h_i -> max(h_i + alpha, 0) summing to one.
inline Histogram norm_sub(const Histogram& h) {
  const double alpha = norm_sub_alpha(h.f());
  std::vector<double> out(h.m());
  double total = 0.0;
  for (int i = 0; i < h.m(); ++i) {
    out[i] = std::max(h.f()[i] + alpha, 0.0);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return Histogram::consistent(h.bins(), std::move(out));
}

}  // namespace ldpshift

#endif  // LDPSHIFT_POSTPROCESS_HPP_
