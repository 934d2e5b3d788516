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

#ifndef LDPSHIFT_SW_HPP_
#define LDPSHIFT_SW_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ldpshift/core.hpp"
#include "ldpshift/oracles.hpp"

namespace ldpshift {

struct SwParams {
  double epsilon;
  double b;
  double p;
  double q;
  int m_s;

  double lo() const { return -b; }
  double hi() const { return 1.0 + b; }
  // Number of output cells of width 1/m_s covering [-b, 1 + b].
  int output_cells() const {
    return static_cast<int>(std::ceil((1.0 + 2.0 * b) * m_s - 1e-9));
  }
};

inline SwParams sw_params(double epsilon, int m_s = 512) {
  const double e = PrivacyBudget(epsilon).exp_eps();
  if (m_s < 2) throw std::invalid_argument("sw_params: m_s must be >= 2");
  const double b = (epsilon * e - e + 1.0) / (2.0 * e * (e - 1.0 - epsilon));
  return {epsilon, b, e / (2.0 * b * e + 1.0), 1.0 / (2.0 * b * e + 1.0), m_s};
}

/// Density of the SW output at y given input x.
inline double sw_density(double x, double y, const SwParams& params) {
  if (y < params.lo() || y > params.hi()) return 0.0;
  return std::abs(x - y) <= params.b ? params.p : params.q;
}

inline SwReport sw_perturb(double x, const SwParams& params, RngStream& rng) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("sw_perturb: x outside [0, 1]");
  const double b = params.b;
  if (rng.bernoulli(2.0 * b * params.p)) {
    return {x - b + 2.0 * b * rng.uniform()};
  }
  // Outside the band the density is flat over a total length of exactly 1.
  double y = -b + rng.uniform();
  if (y >= x - b) y += 2.0 * b;
  return {std::min(y, params.hi())};
}

inline SwReports sw_collect(const Dataset& data, const SwParams& params, RngStream rng) {
  SwReports out;
  out.value.resize(data.n());
  for (std::size_t j = 0; j < data.n(); ++j) {
    auto r = rng.substream(j);
    out.value[j] = sw_perturb(data[j], params, r).value;
  }
  return out;
}

// 0-indexed output cell of a report value.
inline int sw_cell_of(double y, const SwParams& params) {
  if (!(y >= params.lo() - 1e-12 && y <= params.hi() + 1e-12)) {
    throw std::invalid_argument("sw: report outside the output domain");
  }
  const int cells = params.output_cells();
  const int c = static_cast<int>(std::floor((y + params.b) * params.m_s));
  return std::clamp(c, 0, cells - 1);
}

inline std::vector<double> sw_cell_counts(const SwReports& reports, const SwParams& params) {
  std::vector<double> counts(params.output_cells(), 0.0);
  for (double y : reports.value) counts[sw_cell_of(y, params)] += 1.0;
  return counts;
}

// Width of output cell j (0-indexed); the last cell may be truncated.
inline double sw_cell_width(int j, const SwParams& params) {
  const double a = params.lo() + static_cast<double>(j) / params.m_s;
  const double z = std::min(params.lo() + static_cast<double>(j + 1) / params.m_s,
                            params.hi());
  return std::max(z - a, 0.0);
}

/// Dense m~ x m_s channel. M[j][i] = Pr[report in output cell j | input at the
/// center of fine bin i].
struct TransitionMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major

  double operator()(int j, int i) const {
    return data[static_cast<std::size_t>(j) * cols + i];
  }
};

inline TransitionMatrix build_transition(const SwParams& params) {
  TransitionMatrix t;
  t.rows = params.output_cells();
  t.cols = params.m_s;
  t.data.assign(static_cast<std::size_t>(t.rows) * t.cols, 0.0);
  for (int i = 0; i < t.cols; ++i) {
    const double x = (i + 0.5) / params.m_s;
    const double band_lo = x - params.b;
    const double band_hi = x + params.b;
    for (int j = 0; j < t.rows; ++j) {
      const double a = params.lo() + static_cast<double>(j) / params.m_s;
      const double z = std::min(a + 1.0 / params.m_s, params.hi());
      const double overlap = std::max(0.0, std::min(z, band_hi) - std::max(a, band_lo));
      t.data[static_cast<std::size_t>(j) * t.cols + i] =
          params.q * (z - a) + (params.p - params.q) * overlap;
    }
  }
  return t;
}

/// Structured form of the same channel. Input bins and output cells share the
/// 1/m_s lattice, so every band covers a fixed-length interval in cell units
/// and both products reduce to prefix sums.
class SwChannel {
 public:
  explicit SwChannel(const SwParams& params)
      : params_(params),
        m_(params.m_s),
        cells_(params.output_cells()),
        len_(2.0 * params.b * params.m_s),
        width_(cells_) {
    for (int j = 0; j < cells_; ++j) width_[j] = sw_cell_width(j, params);
  }

  int rows() const { return cells_; }
  int cols() const { return m_; }

  // y = M f.
  void forward(std::span<const double> f, std::span<double> y) const {
    // Band of fine bin i covers [i + 0.5, i + 0.5 + L) in cell units.
    // G(t) = sum_i f_i clamp(t - s_i, 0, L); y_j gets (p - q)/m_s (G(j+1) - G(j)).
    pre_f_.assign(m_ + 1, 0.0);
    pre_fs_.assign(m_ + 1, 0.0);
    for (int i = 0; i < m_; ++i) {
      pre_f_[i + 1] = pre_f_[i] + f[i];
      pre_fs_[i + 1] = pre_fs_[i] + f[i] * (i + 0.5);
    }
    const double total = pre_f_[m_];
    auto G = [&](double t) {
      // i with s_i <= t - L contribute L; i with t - L < s_i < t contribute t - s_i.
      const int full = count_le(t - len_);
      const int part = count_lt(t);
      const double a = len_ * pre_f_[full];
      const double mass = pre_f_[part] - pre_f_[full];
      const double moment = pre_fs_[part] - pre_fs_[full];
      return a + t * mass - moment;
    };
    double prev = G(0.0);
    const double scale = (params_.p - params_.q) / params_.m_s;
    for (int j = 0; j < cells_; ++j) {
      const double next = G(static_cast<double>(j + 1));
      y[j] = params_.q * width_[j] * total + scale * (next - prev);
      prev = next;
    }
  }

  // g = M^T r.
  void adjoint(std::span<const double> r, std::span<double> g) const {
    // R(t) = integral of the cellwise-constant r over [0, t) in cell units.
    pre_r_.assign(cells_ + 1, 0.0);
    double qsum = 0.0;
    for (int j = 0; j < cells_; ++j) {
      pre_r_[j + 1] = pre_r_[j] + r[j];
      qsum += r[j] * width_[j];
    }
    auto R = [&](double t) {
      if (t <= 0.0) return 0.0;
      if (t >= cells_) return pre_r_[cells_];
      const int k = static_cast<int>(std::floor(t));
      return pre_r_[k] + (t - k) * r[k];
    };
    const double scale = (params_.p - params_.q) / params_.m_s;
    for (int i = 0; i < m_; ++i) {
      const double s = i + 0.5;
      g[i] = params_.q * qsum + scale * (R(s + len_) - R(s));
    }
  }

 private:
  // Number of fine bins with s_i = i + 0.5 <= t (resp. < t).
  int count_le(double t) const {
    if (t < 0.5) return 0;
    return std::min(m_, static_cast<int>(std::floor(t - 0.5)) + 1);
  }
  int count_lt(double t) const {
    if (t <= 0.5) return 0;
    return std::min(m_, static_cast<int>(std::ceil(t - 0.5)));
  }

  SwParams params_;
  int m_;
  int cells_;
  double len_;
  std::vector<double> width_;
  mutable std::vector<double> pre_f_, pre_fs_, pre_r_;
};

enum class EmsStopRule {
  // |LL_t - LL_{t-1}| < tol (count-weighted log-likelihood), or the L1 step
  // of the estimate falls to 1/N or below. At least three rounds are run.
  kAbsolute,
  // |LL_t - LL_{t-1}| < tol * |LL_{t-1}|.
  kRelative,
};

struct EmsOptions {
  int max_iters = 10000;
  double tol = 1e-3;
  EmsStopRule rule = EmsStopRule::kAbsolute;
  bool record_trace = false;
};

struct EmsResult {
  Histogram estimate;
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0.0;
  // Per iteration, the log-likelihood before and after the EM update (before
  // smoothing). Filled only when EmsOptions::record_trace is set.
  std::vector<double> ll_before_em;
  std::vector<double> ll_after_em;
};

namespace detail {

inline double log_likelihood(std::span<const double> counts, std::span<const double> y) {
  double ll = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] > 0.0) ll += counts[j] * std::log(std::max(y[j], 1e-300));
  }
  return ll;
}

inline void smooth_binomial(std::vector<double>& f, std::vector<double>& scratch) {
  const std::size_t m = f.size();
  scratch.resize(m);
  scratch[0] = (2.0 * f[0] + f[1]) / 3.0;
  scratch[m - 1] = (f[m - 2] + 2.0 * f[m - 1]) / 3.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    scratch[i] = 0.25 * f[i - 1] + 0.5 * f[i] + 0.25 * f[i + 1];
  }
  double total = 0.0;
  for (double v : scratch) total += v;
  for (std::size_t i = 0; i < m; ++i) f[i] = scratch[i] / total;
}

}  // namespace detail

/// EM with smoothing over the m_s fine bins, from output-cell counts.
///
/// Procedure: start uniform; each round computes y = M f, reweights
/// f_i <- f_i (M^T (n / y))_i / N, smooths with the (1, 2, 1) / 4 kernel
/// ((2, 1) / 3 on the edges) and renormalizes, then evaluates the
/// log-likelihood of the smoothed estimate for the stopping rule.
inline EmsResult ems_from_counts(std::span<const double> counts, const SwParams& params,
                                 const EmsOptions& options = {}) {
  SwChannel channel(params);
  if (static_cast<int>(counts.size()) != channel.rows()) {
    throw std::invalid_argument("ems: count vector does not match output cells");
  }
  double n = 0.0;
  for (double c : counts) n += c;
  if (!(n > 0.0)) throw std::invalid_argument("ems: no reports");

  const int m = params.m_s;
  std::vector<double> f(m, 1.0 / m), prev_f(m), y(channel.rows()), r(channel.rows()),
      g(m), scratch;
  EmsResult result{Histogram::uniform(BinSpec(m)), 0, false, 0.0, {}, {}};
  channel.forward(f, y);
  double ll = detail::log_likelihood(counts, y);
  int it = 0;
  while (it < options.max_iters) {
    prev_f = f;
    for (int j = 0; j < channel.rows(); ++j) {
      r[j] = counts[j] > 0.0 ? counts[j] / std::max(y[j], 1e-300) : 0.0;
    }
    channel.adjoint(r, g);
    for (int i = 0; i < m; ++i) f[i] *= g[i] / n;
    if (options.record_trace) {
      channel.forward(f, y);
      result.ll_before_em.push_back(ll);
      result.ll_after_em.push_back(detail::log_likelihood(counts, y));
    }
    detail::smooth_binomial(f, scratch);
    channel.forward(f, y);
    const double next_ll = detail::log_likelihood(counts, y);
    ++it;
    const double change = std::abs(next_ll - ll);
    const double prev_ll = ll;
    ll = next_ll;
    if (options.rule == EmsStopRule::kRelative) {
      if (change < options.tol * std::abs(prev_ll)) {
        result.converged = true;
        break;
      }
    } else if (it >= 3) {
      double step = 0.0;
      for (int i = 0; i < m; ++i) step += std::abs(f[i] - prev_f[i]);
      if (change < options.tol || step <= 1.0 / n) {
        result.converged = true;
        break;
      }
    }
  }
  result.iterations = it;
  result.log_likelihood = ll;
  double total = 0.0;
  for (auto& v : f) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (auto& v : f) v /= total;
  result.estimate = Histogram::consistent(BinSpec(m), std::move(f));
  return result;
}

inline EmsResult ems_reconstruct_detailed(const SwReports& reports, const SwParams& params,
                                          const EmsOptions& options = {}) {
  if (reports.size() == 0) throw std::invalid_argument("ems: no reports");
  const auto counts = sw_cell_counts(reports, params);
  return ems_from_counts(counts, params, options);
}

inline Histogram ems_reconstruct(const SwReports& reports, const SwParams& params,
                                 int max_iters = 10000, double tol = 1e-3) {
  EmsOptions o;
  o.max_iters = max_iters;
  o.tol = tol;
  return ems_reconstruct_detailed(reports, params, o).estimate;
}

/// Sums consecutive blocks of a fine histogram onto a coarser grid.
inline Histogram coarsen(const Histogram& h, const BinSpec& target) {
  if (h.m() % target.m() != 0) {
    throw std::invalid_argument("coarsen: fine grid not divisible by target");
  }
  const int block = h.m() / target.m();
  std::vector<double> out(target.m(), 0.0);
  for (int i = 0; i < h.m(); ++i) out[i / block] += h.f()[i];
  return Histogram(target, std::move(out), h.kind());
}

}  // namespace ldpshift

#endif  // LDPSHIFT_SW_HPP_
