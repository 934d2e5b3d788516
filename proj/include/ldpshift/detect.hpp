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

#ifndef LDPSHIFT_DETECT_HPP_
#define LDPSHIFT_DETECT_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "ldpshift/mechanism.hpp"
#include "ldpshift/metrics.hpp"

namespace ldpshift {

// ---------------------------------------------------------------------------
// Per-bin support statistics. One pass over the reports yields both the
// frequency estimate and the report-space summary.
// ---------------------------------------------------------------------------

/// GRR: index counts. OUE: one-bit counts. OLH: C(B_i). HST: sum_j sign_j
/// s_j[i]. SW: output-cell counts.
inline std::vector<double> support_statistics(const ReportSet& reports, const Mechanism& m,
                                              const ServerAssignment* assignment) {
  switch (m.protocol) {
    case Protocol::kGrr: {
      std::vector<double> c(m.m_o, 0.0);
      for (auto y : std::get<GrrReports>(reports).index) {
        check_bin(y, m.m_o, "grr");
        c[y - 1] += 1.0;
      }
      return c;
    }
    case Protocol::kOue: return oue_bit_counts(std::get<OueReports>(reports));
    case Protocol::kOlh:
      return olh_support_counts(std::get<OlhReports>(reports), m.olh,
                                m.server() ? assignment : nullptr);
    case Protocol::kHst:
      return hst_signed_sums(std::get<HstReports>(reports), m.server() ? assignment : nullptr);
    case Protocol::kSw: return sw_cell_counts(std::get<SwReports>(reports), m.sw);
  }
  throw std::invalid_argument("support_statistics: unknown protocol");
}

inline Histogram raw_from_support(std::span<const double> s, double n, const Mechanism& m) {
  std::vector<double> f(s.begin(), s.end());
  switch (m.protocol) {
    case Protocol::kGrr:
      for (auto& v : f) v = (v - n * m.grr.q) / (n * (m.grr.p - m.grr.q));
      break;
    case Protocol::kOue:
      for (auto& v : f) v = (v - n * m.oue.q) / (n * (m.oue.p - m.oue.q));
      break;
    case Protocol::kOlh: {
      const double inv_g = 1.0 / m.olh.g;
      for (auto& v : f) v = (v - n * inv_g) / (n * (m.olh.p - inv_g));
      break;
    }
    case Protocol::kHst:
      for (auto& v : f) v = m.hst.c * v / n;
      break;
    case Protocol::kSw:
      throw std::invalid_argument("raw_from_support: SW has no raw estimate");
  }
  return Histogram::raw(m.bins(), std::move(f));
}

/// Normalized support histogram over the report space.
struct ReportSummary {
  std::vector<double> s;
  double width = 0.0;  // bin width used by the Wasserstein distance
};

inline ReportSummary summary_from_support(std::span<const double> s, double n,
                                          const Mechanism& m) {
  ReportSummary out;
  out.width = m.protocol == Protocol::kSw ? 1.0 / m.sw.m_s : 1.0 / m.m_o;
  out.s.assign(s.begin(), s.end());
  if (m.protocol == Protocol::kHst) {
    // Reports with sign_j s_j[i] > 0 number (n + sum_i) / 2.
    for (auto& v : out.s) v = 0.5 * (n + v);
  }
  double total = 0.0;
  for (double v : out.s) total += v;
  if (!(total > 0.0)) {
    std::fill(out.s.begin(), out.s.end(), 1.0 / static_cast<double>(out.s.size()));
    return out;
  }
  for (auto& v : out.s) v /= total;
  return out;
}

inline ReportSummary report_summary(const ReportSet& reports, const Mechanism& m,
                                    const ServerAssignment* assignment) {
  const double n = static_cast<double>(report_count(reports));
  if (!(n > 0.0)) throw std::invalid_argument("report_summary: no reports");
  return summary_from_support(support_statistics(reports, m, assignment), n, m);
}

// Consistent estimate on the native grid from precomputed support statistics.
inline Histogram native_from_support(std::span<const double> s, double n, const Mechanism& m,
                                     const EmsOptions& ems = {}) {
  if (m.protocol == Protocol::kSw) return ems_from_counts(s, m.sw, ems).estimate;
  return norm_sub(raw_from_support(s, n, m));
}

// ---------------------------------------------------------------------------
// Synthesis.
// ---------------------------------------------------------------------------

/// t independent draws from h, returned as bin-center values in [0, 1].
inline std::vector<double> sample_histogram(const Histogram& h, std::size_t t, RngStream rng) {
  const auto c = cdf(h);
  std::vector<double> out(t);
  const double total = c.back();
  for (auto& v : out) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(c.begin(), c.end(), u);
    int bin = static_cast<int>(it - c.begin()) + 1;
    if (bin > h.m()) {
      bin = h.m();
      while (bin > 1 && !(h[bin] > 0.0)) --bin;
    }
    v = h.bins().center(bin);
  }
  return out;
}

/// Estimates the distribution behind `reports` (aggregation + Norm-Sub for
/// CFOs, EMS for SW) and draws t samples from it.
inline std::vector<double> synthesize(const ReportSet& reports, const Mechanism& m,
                                      const ServerAssignment* assignment, std::size_t t,
                                      RngStream rng) {
  if (t == 0) return {};
  return sample_histogram(native_estimate(reports, m, assignment), t, rng);
}

// Fresh honest round over synthetic values, with a fresh server assignment
// when the protocol needs one.
inline Collected perturb_synthetic(std::span<const double> values, const Mechanism& m,
                                   RngStream rng) {
  return collect(Dataset(std::vector<double>(values.begin(), values.end())), m, rng);
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov.
// ---------------------------------------------------------------------------

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// S = sup |F_a - F_b|; p = min(1, 2 exp(-2 S^2 mn / (m + n))).
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double m = static_cast<double>(x.size());
  const double n = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j >= y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    s = std::max(s, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
  }
  KsResult r;
  r.statistic = s;
  const double k = m * n / (m + n);
  r.p_value = std::min(1.0, 2.0 * std::exp(-2.0 * s * s * k));
  return r;
}

// ---------------------------------------------------------------------------
// Zero-shot detection.
// ---------------------------------------------------------------------------

struct DetectOptions {
  int rounds = 10;       // m
  double alpha = 0.002;
  EmsOptions ems{};
};

struct DetectionVerdict {
  std::vector<double> g_ben;
  std::vector<double> g_det;
  double ks_stat = 0.0;
  double p_value = 1.0;
  bool polluted = false;
};

/// Compares the reports with data re-synthesized from their own estimate.
///
/// Procedure: estimate once from the reports; then in each of `rounds`
/// rounds, sample n values from that estimate and perturb them (X2),
/// estimate from X2, sample and perturb again (X3). g_ben collects
/// W1(summary X2, summary X3) and g_det collects W1(summary reports,
/// summary X2). A two-sample KS test on the groups gives the verdict.
inline DetectionVerdict zero_shot_detect(const ReportSet& reports, const Mechanism& m,
                                         const ServerAssignment* assignment, RngStream rng,
                                         const DetectOptions& opt = {}) {
  if (opt.rounds < 2) throw std::invalid_argument("zero_shot_detect: rounds must be >= 2");
  const std::size_t n = report_count(reports);
  if (n == 0) throw std::invalid_argument("zero_shot_detect: no reports");
  const double dn = static_cast<double>(n);

  const auto s0 = support_statistics(reports, m, assignment);
  const auto sum0 = summary_from_support(s0, dn, m);
  const Histogram base = native_from_support(s0, dn, m, opt.ems);

  DetectionVerdict v;
  v.g_ben.resize(opt.rounds);
  v.g_det.resize(opt.rounds);
  for (int i = 0; i < opt.rounds; ++i) {
    auto r = rng.substream(static_cast<std::uint64_t>(i));
    const auto x2 = sample_histogram(base, n, r.substream(1));
    const auto c2 = perturb_synthetic(x2, m, r.substream(2));
    const auto s2 = support_statistics(c2.reports, m, c2.assignment_ptr());
    const auto sum2 = summary_from_support(s2, dn, m);
    const auto x3 = sample_histogram(native_from_support(s2, dn, m, opt.ems), n, r.substream(3));
    const auto c3 = perturb_synthetic(x3, m, r.substream(4));
    const auto s3 = support_statistics(c3.reports, m, c3.assignment_ptr());
    const auto sum3 = summary_from_support(s3, dn, m);
    v.g_ben[i] = wasserstein1(sum2.s, sum3.s, sum2.width);
    v.g_det[i] = wasserstein1(sum0.s, sum2.s, sum0.width);
  }
  const auto ks = ks_two_sample(v.g_det, v.g_ben);
  v.ks_stat = ks.statistic;
  v.p_value = ks.p_value;
  v.polluted = v.p_value < opt.alpha;
  return v;
}

// ---------------------------------------------------------------------------
// MUD baseline.
// ---------------------------------------------------------------------------

/// Regularized incomplete beta I(x; a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("reg_inc_beta: argument outside the domain");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

// Pr[Bin(n, x) >= tau] written as I(x; tau, n - tau + 1).
inline double binomial_upper_tail(double x, double tau, double n) {
  if (tau <= 0.0) return 1.0;
  if (tau > n) return 0.0;
  return reg_inc_beta(x, tau, n - tau + 1.0);
}

inline double mud_threshold(Protocol protocol, double epsilon, std::size_t n,
                            double significance = 0.01) {
  if (n == 0) throw std::invalid_argument("mud_threshold: n must be >= 1");
  const double dn = static_cast<double>(n);
  double x = 0.0;
  switch (protocol) {
    case Protocol::kOue: return std::sqrt((dn / 4.0) / significance) + dn / 2.0;
    case Protocol::kOlh: x = 0.5; break;
    case Protocol::kHst: {
      const double e = std::exp(epsilon);
      x = e / (e + 1.0);
      break;
    }
    default:
      throw std::invalid_argument(std::string("mud: unsupported protocol ") +
                                  to_string(protocol));
  }
  // Smallest integer tau in [1, n] with tail <= significance; the tail is
  // nonincreasing in tau.
  std::size_t lo = 1, hi = n;
  if (binomial_upper_tail(x, static_cast<double>(hi), dn) > significance) return dn + 1.0;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (binomial_upper_tail(x, static_cast<double>(mid), dn) <= significance) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return static_cast<double>(lo);
}

/// Number of reports supporting the right-most bin.
inline std::size_t mud_support(const ReportSet& reports, const Mechanism& m,
                               const ServerAssignment* assignment) {
  std::size_t count = 0;
  switch (m.protocol) {
    case Protocol::kOue: {
      const auto& r = std::get<OueReports>(reports);
      for (std::size_t j = 0; j < r.size(); ++j) count += r.bit(j, m.m_o);
      return count;
    }
    case Protocol::kOlh: {
      const auto& r = std::get<OlhReports>(reports);
      const auto* a = m.server() ? assignment : nullptr;
      for (std::size_t j = 0; j < r.size(); ++j) {
        const std::uint64_t s = a ? a->seeds[j] : r.seed[j];
        count += hash_map(s, m.m_o, m.olh.g) == r.value[j];
      }
      return count;
    }
    case Protocol::kHst: {
      const auto& r = std::get<HstReports>(reports);
      const auto* a = m.server() ? assignment : nullptr;
      for (std::size_t j = 0; j < r.size(); ++j) {
        count += r.sign[j] * hst_report_coordinate(r, j, m.m_o, a) > 0;
      }
      return count;
    }
    default:
      throw std::invalid_argument(std::string("mud: unsupported protocol ") +
                                  to_string(m.protocol));
  }
}

inline bool mud_detect(const ReportSet& reports, const Mechanism& m,
                       const ServerAssignment* assignment) {
  const double tau = mud_threshold(m.protocol, m.epsilon, report_count(reports));
  return static_cast<double>(mud_support(reports, m, assignment)) > tau;
}

}  // namespace ldpshift

#endif  // LDPSHIFT_DETECT_HPP_
