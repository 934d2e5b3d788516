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

#ifndef LDPSHIFT_METRICS_HPP_
#define LDPSHIFT_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ldpshift/core.hpp"

namespace ldpshift {

struct MetricResult {
  double asg = 0.0;
  std::optional<double> sgr;
  double w1 = 0.0;
};

inline void require_same_grid(const Histogram& a, const Histogram& b, const char* who) {
  if (!(a.bins() == b.bins())) {
    throw std::invalid_argument(std::string(who) + ": bin grid mismatch");
  }
}

/// Shift gain: sum over v of P(X, v) - P(Xa, v). Positive when Xa sits to the
/// right of X. Unnormalized, so the value scales with m.
inline double asg(std::span<const double> x, std::span<const double> xa) {
  if (x.size() != xa.size()) throw std::invalid_argument("asg: bin grid mismatch");
  double px = 0.0, pa = 0.0, total = 0.0;
  for (std::size_t v = 0; v < x.size(); ++v) {
    px += x[v];
    pa += xa[v];
    total += px - pa;
  }
  return total;
}

inline double asg(const Histogram& x, const Histogram& xa) {
  require_same_grid(x, xa, "asg");
  return asg(x.f(), xa.f());
}

/// (1 - beta) X + beta e_m.
inline Histogram baseline_skew(const Histogram& x, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("baseline_skew: beta outside [0, 1]");
  }
  if (!x.is_consistent()) {
    throw std::invalid_argument("baseline_skew: input must be consistent");
  }
  std::vector<double> f(x.f().begin(), x.f().end());
  for (auto& v : f) v *= 1.0 - beta;
  f.back() += beta;
  return Histogram::consistent(x.bins(), std::move(f));
}

/// Ratio of the attack's gain to the analytic baseline gain. Empty when the
/// baseline gain is zero (beta = 0 or X already a point mass on bin m).
inline std::optional<double> sgr(const Histogram& x, const Histogram& xa_hat, double beta) {
  require_same_grid(x, xa_hat, "sgr");
  if (!(beta > 0.0)) return std::nullopt;
  const double denom = asg(x, baseline_skew(x, beta));
  if (!(std::abs(denom) > 1e-15)) return std::nullopt;
  return asg(x, xa_hat) / denom;
}

/// width * sum_v |P(A, v) - P(B, v)|.
inline double wasserstein1(std::span<const double> a, std::span<const double> b,
                           double width) {
  if (a.size() != b.size()) throw std::invalid_argument("wasserstein1: grid mismatch");
  double pa = 0.0, pb = 0.0, total = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    pa += a[v];
    pb += b[v];
    total += std::abs(pa - pb);
  }
  if (std::abs(pa - pb) > 1e-9) {
    throw std::invalid_argument("wasserstein1: unequal total mass");
  }
  return width * total;
}

inline double wasserstein1(const Histogram& a, const Histogram& b) {
  require_same_grid(a, b, "wasserstein1");
  return wasserstein1(a.f(), b.f(), a.bins().width());
}

inline MetricResult compute_metrics(const Histogram& x, const Histogram& xa, double beta) {
  MetricResult r;
  r.asg = asg(x, xa);
  r.sgr = sgr(x, xa, beta);
  r.w1 = wasserstein1(x, xa);
  return r;
}

/// Area under the ROC curve as the Mann-Whitney statistic: the probability a
/// random positive outscores a random negative, ties counting one half.
inline double roc_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) {
    throw std::invalid_argument("roc_auc: size mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double n_pos = 0.0, n_neg = 0.0, rank_sum = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    while (end < order.size() && scores[order[end]] == scores[order[k]]) ++end;
    const double mid_rank = 0.5 * static_cast<double>(k + 1 + end);
    for (std::size_t t = k; t < end; ++t) {
      if (positive[order[t]]) {
        rank_sum += mid_rank;
        n_pos += 1.0;
      } else {
        n_neg += 1.0;
      }
    }
    k = end;
  }
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

inline double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  std::vector<char> tmp(positive.begin(), positive.end());
  std::unique_ptr<bool[]> flags(new bool[tmp.size()]);
  for (std::size_t i = 0; i < tmp.size(); ++i) flags[i] = tmp[i] != 0;
  return roc_auc(std::span<const double>(scores),
                 std::span<const bool>(flags.get(), tmp.size()));
}

/// Same quantity by sweeping the threshold from high to low and integrating
/// the ROC polyline with the trapezoid rule.
inline double roc_auc_trapezoid(std::span<const double> scores,
                                std::span<const bool> positive) {
  if (scores.size() != positive.size()) {
    throw std::invalid_argument("roc_auc: size mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double n_neg = static_cast<double>(positive.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double prev_tp = tp, prev_fp = fp;
    std::size_t end = k;
    while (end < order.size() && scores[order[end]] == scores[order[k]]) {
      if (positive[order[end]]) {
        tp += 1.0;
      } else {
        fp += 1.0;
      }
      ++end;
    }
    area += (fp - prev_fp) / n_neg * (tp + prev_tp) / (2.0 * n_pos);
    k = end;
  }
  return area;
}

}  // namespace ldpshift

#endif  // LDPSHIFT_METRICS_HPP_
