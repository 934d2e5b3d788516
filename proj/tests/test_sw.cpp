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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ldpshift/ldpshift.hpp"
#include "test_util.hpp"

namespace ldpshift {
namespace {

TEST(SwParams, EpsOne) {
  const auto p = sw_params(1.0);
  EXPECT_NEAR(p.b, 0.2561, 1e-4);
  EXPECT_NEAR(p.p, 1.1363, 1e-4);
  EXPECT_NEAR(p.q, 0.4180, 1e-4);
  EXPECT_EQ(p.m_s, 512);
}

TEST(SwParams, Identities) {
  for (double eps : {0.05, 0.1, 0.6, 1.0, 2.0, 4.0, 8.0}) {
    const auto p = sw_params(eps);
    EXPECT_NEAR(2 * p.b * p.p + p.q, 1.0, 1e-9) << eps;
    EXPECT_NEAR(p.p / p.q, std::exp(eps), 1e-9 * std::exp(eps));
    EXPECT_GT(p.b, 0.0);
  }
}

TEST(SwPerturb, BandMassAndSupport) {
  const auto p = sw_params(1.0);
  RngStream rng(1);
  int in_band = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double y = sw_perturb(0.5, p, rng).value;
    ASSERT_GE(y, p.lo());
    ASSERT_LE(y, p.hi());
    in_band += std::abs(y - 0.5) <= p.b;
  }
  EXPECT_NEAR(in_band / static_cast<double>(n), 2 * p.b * p.p, 0.01);
  EXPECT_NEAR(2 * p.b * p.p, 0.582, 0.001);
}

TEST(SwPerturb, DensityMatchesAtLeftEdge) {
  // x = 0: band [-b, b]. Compare a histogram of outputs with the density.
  const auto p = sw_params(1.0);
  RngStream rng(2);
  const int n = 400000;
  const int cells = 30;
  std::vector<double> hist(cells, 0.0);
  const double width = (p.hi() - p.lo()) / cells;
  for (int k = 0; k < n; ++k) {
    const double y = sw_perturb(0.0, p, rng).value;
    hist[std::min(cells - 1, static_cast<int>((y - p.lo()) / width))] += 1.0;
  }
  for (int c = 0; c < cells; ++c) {
    const double a = p.lo() + c * width, z = a + width;
    const double band = std::max(0.0, std::min(z, p.b) - std::max(a, -p.b));
    const double expected = p.q * width + (p.p - p.q) * band;
    EXPECT_NEAR(hist[c] / n, expected, 0.003) << c;
  }
}

TEST(SwPerturb, LdpRatio) {
  const auto p = sw_params(0.7);
  double worst = 0.0;
  for (double x1 = 0.0; x1 <= 1.0; x1 += 0.05) {
    for (double x2 = 0.0; x2 <= 1.0; x2 += 0.05) {
      for (double y = p.lo(); y <= p.hi(); y += 0.01) {
        worst = std::max(worst, sw_density(x1, y, p) / sw_density(x2, y, p));
      }
    }
  }
  EXPECT_LE(worst, std::exp(0.7) * (1 + 1e-12));
}

TEST(Transition, ColumnsBandsToeplitz) {
  const auto p = sw_params(1.0, 64);
  const auto m = build_transition(p);
  EXPECT_EQ(m.rows, p.output_cells());
  EXPECT_EQ(m.rows, static_cast<int>(std::ceil((1 + 2 * p.b) * 64)));
  for (int i = 0; i < m.cols; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.rows; ++j) s += m(j, i);
    EXPECT_NEAR(s, 1.0, 1e-6) << i;
  }
  // Interior column: a cell fully inside the band vs fully outside.
  const int i = 32;
  const double x = (i + 0.5) / 64;
  const int inside = sw_cell_of(x, p);
  const int outside = sw_cell_of(p.hi() - 1e-9, p) - 1;
  EXPECT_NEAR(m(inside, i) / m(outside, i), std::exp(1.0), 1e-9);
  // Shifting the input one bin shifts the column one cell.
  for (int j = 1; j + 2 < m.rows; ++j) {
    EXPECT_NEAR(m(j + 1, 31), m(j, 30), 1e-12);
  }
}

TEST(Transition, FastChannelMatchesDense) {
  for (double eps : {0.1, 0.6, 1.0, 3.0}) {
    const auto p = sw_params(eps, 64);
    const auto dense = build_transition(p);
    const SwChannel fast(p);
    RngStream rng(5);
    std::vector<double> f(64), r(dense.rows), y(dense.rows), g(64);
    for (auto& v : f) v = rng.uniform();
    for (auto& v : r) v = rng.uniform();
    fast.forward(f, y);
    fast.adjoint(r, g);
    for (int j = 0; j < dense.rows; ++j) {
      double ref = 0.0;
      for (int i = 0; i < 64; ++i) ref += dense(j, i) * f[i];
      EXPECT_NEAR(y[j], ref, 1e-12);
    }
    for (int i = 0; i < 64; ++i) {
      double ref = 0.0;
      for (int j = 0; j < dense.rows; ++j) ref += dense(j, i) * r[j];
      EXPECT_NEAR(g[i], ref, 1e-12);
    }
  }
}

TEST(Ems, UniformRecovery) {
  const auto p = sw_params(1.0);
  std::vector<double> v(100000);
  RngStream data(3);
  for (auto& x : v) x = data.uniform();
  const auto reports = sw_collect(Dataset(v), p, RngStream(4));
  const auto est = ems_reconstruct(reports, p);
  EXPECT_EQ(est.m(), 512);
  double total = 0.0;
  for (double f : est.values()) {
    EXPECT_GE(f, 0.0);
    total += f;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_LT(wasserstein1(est, Histogram::uniform(BinSpec(512))), 0.02);
}

TEST(Ems, PointMassConcentrates) {
  const auto p = sw_params(4.0);
  const auto reports = sw_collect(Dataset(std::vector<double>(100000, 1.0)), p, RngStream(6));
  const auto est = ems_reconstruct(reports, p);
  const auto& f = est.values();
  const int mode = static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
  EXPECT_GE(mode, static_cast<int>(0.95 * 512));
}

TEST(Ems, LogLikelihoodNondecreasingAcrossEmSteps) {
  const auto p = sw_params(0.8, 128);
  const auto data = sample_gaussian_dataset(20000, 0, 10, RngStream(9));
  const auto reports = sw_collect(data, p, RngStream(10));
  EmsOptions o;
  o.record_trace = true;
  o.max_iters = 300;
  const auto r = ems_reconstruct_detailed(reports, p, o);
  ASSERT_FALSE(r.ll_after_em.empty());
  for (std::size_t t = 0; t < r.ll_after_em.size(); ++t) {
    EXPECT_GE(r.ll_after_em[t], r.ll_before_em[t] - 1e-7 * std::abs(r.ll_before_em[t])) << t;
  }
}

TEST(Ems, OrderInvariant) {
  const auto p = sw_params(1.0, 64);
  const auto data = sample_gaussian_dataset(5000, 0, 10, RngStream(11));
  auto reports = sw_collect(data, p, RngStream(12));
  const auto a = ems_reconstruct(reports, p);
  std::reverse(reports.value.begin(), reports.value.end());
  std::rotate(reports.value.begin(), reports.value.begin() + 1234, reports.value.end());
  const auto b = ems_reconstruct(reports, p);
  EXPECT_EQ(a.values(), b.values());
}

TEST(Ems, RejectsOutOfDomain) {
  const auto p = sw_params(1.0, 64);
  SwReports r;
  r.value = {0.5, p.hi() + 0.1};
  EXPECT_THROW(ems_reconstruct(r, p), std::invalid_argument);
  EXPECT_THROW(ems_reconstruct(SwReports{}, p), std::invalid_argument);
}

TEST(Coarsen, Examples) {
  const auto u = coarsen(Histogram::uniform(BinSpec(512)), BinSpec(32));
  for (double v : u.values()) EXPECT_NEAR(v, 1.0 / 32, 1e-15);
  const auto last = coarsen(Histogram::point_mass(BinSpec(512), 512), BinSpec(32));
  EXPECT_EQ(last[32], 1.0);
  std::vector<double> f(20, 0.0);
  RngStream rng(1);
  double s = 0.0;
  for (auto& v : f) s += (v = rng.uniform());
  for (auto& v : f) v /= s;
  const auto c = coarsen(Histogram::consistent(BinSpec(20), f), BinSpec(2));
  double first = 0.0;
  for (int i = 0; i < 10; ++i) first += f[i];
  EXPECT_DOUBLE_EQ(c[1], first);
  EXPECT_THROW(coarsen(Histogram::uniform(BinSpec(20)), BinSpec(3)), std::invalid_argument);
}

}  // namespace
}  // namespace ldpshift
