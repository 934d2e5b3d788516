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

using testing::cyclic_uniform;

// Exact Pr[Bin(n, x) >= k] by direct summation in long double.
long double binomial_tail_sum(int n, int k, long double x) {
  long double total = 0.0L;
  for (int j = k; j <= n; ++j) {
    long double c = 1.0L;
    for (int t = 1; t <= j; ++t) c = c * (n - j + t) / t;
    total += c * std::pow(x, static_cast<long double>(j)) *
             std::pow(1.0L - x, static_cast<long double>(n - j));
  }
  return total;
}

TEST(Summary, OueUniformAndAttack) {
  const auto m = make_mechanism(Protocol::kOue, Setting::kUser, 1.0);
  const auto c = collect(cyclic_uniform(100000, 32), m, RngStream(1));
  const auto s = report_summary(c.reports, m, nullptr);
  for (double v : s.s) EXPECT_NEAR(v, 1.0 / 32, 0.002);
  const ReportSet fake = attack_oue(m.oue, 100);
  const auto e = report_summary(fake, m, nullptr);
  for (int i = 0; i < 31; ++i) EXPECT_EQ(e.s[i], 0.0);
  EXPECT_EQ(e.s[31], 1.0);
}

TEST(Summary, SwTotalAndOrderInvariance) {
  const auto m = make_mechanism(Protocol::kSw, Setting::kUser, 1.0);
  auto c = collect(sample_gaussian_dataset(5000, 0, 10, RngStream(2)), m, RngStream(3));
  const auto a = report_summary(c.reports, m, nullptr);
  double total = 0.0;
  for (double v : a.s) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  auto& vals = std::get<SwReports>(c.reports).value;
  std::reverse(vals.begin(), vals.end());
  EXPECT_EQ(report_summary(c.reports, m, nullptr).s, a.s);
}

TEST(Summary, HstPositiveSupportRate) {
  const auto m = make_mechanism(Protocol::kHst, Setting::kUser, 0.6);
  const auto c = collect(cyclic_uniform(3000, 32), m, RngStream(4));
  const auto& r = std::get<HstReports>(c.reports);
  std::vector<double> pos(32, 0.0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    for (int i = 1; i <= 32; ++i) pos[i - 1] += r.sign[j] * hst_report_coordinate(r, j, i, nullptr) > 0;
  }
  double total = 0.0;
  for (double v : pos) total += v;
  const auto s = report_summary(c.reports, m, nullptr);
  for (int i = 0; i < 32; ++i) EXPECT_NEAR(s.s[i], pos[i] / total, 1e-12);
}

TEST(Synthesize, Examples) {
  const auto m = make_mechanism(Protocol::kGrr, Setting::kUser, 1.0);
  const ReportSet sharp = attack_grr(m.grr, 1000);
  EXPECT_TRUE(synthesize(sharp, m, nullptr, 0, RngStream(1)).empty());
  // The estimate of all-top reports is e_m.
  for (double v : synthesize(sharp, m, nullptr, 500, RngStream(2))) {
    EXPECT_EQ(bin_of(v, m.bins()), 32);
  }
  const auto c = collect(sample_gaussian_dataset(50000, 0, 10, RngStream(3)), m, RngStream(4));
  const auto est = native_estimate(c.reports, m, nullptr);
  const auto draws = synthesize(c.reports, m, nullptr, 200000, RngStream(5));
  const auto h = empirical_histogram(Dataset(draws), m.bins());
  EXPECT_LT(testing::max_abs_diff(h.values(), est.values()), 0.01);
}

TEST(Ks, Examples) {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  auto r = ks_two_sample(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  r = ks_two_sample(a, b);
  EXPECT_EQ(r.statistic, 1.0);
  EXPECT_NEAR(r.p_value, 2.0 * std::exp(-3.0), 1e-12);
  std::vector<double> x(10), y(10);
  for (int i = 0; i < 10; ++i) {
    x[i] = i;
    y[i] = i + 5;
  }
  r = ks_two_sample(x, y);
  EXPECT_DOUBLE_EQ(r.statistic, 0.5);
  EXPECT_NEAR(r.p_value, 2.0 * std::exp(-2.5), 1e-12);
  EXPECT_THROW(ks_two_sample(std::vector<double>{}, a), std::invalid_argument);
}

TEST(Ks, RangeAndSymmetry) {
  RngStream rng(6);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(1 + rng.below(30)), b(1 + rng.below(30));
    for (auto& v : a) v = static_cast<double>(rng.below(10));
    for (auto& v : b) v = static_cast<double>(rng.below(12));
    const auto ab = ks_two_sample(a, b);
    const auto ba = ks_two_sample(b, a);
    EXPECT_EQ(ab.statistic, ba.statistic);
    EXPECT_EQ(ab.p_value, ba.p_value);
    EXPECT_GE(ab.statistic, 0.0);
    EXPECT_LE(ab.statistic, 1.0);
    EXPECT_GE(ab.p_value, 0.0);
    EXPECT_LE(ab.p_value, 1.0);
  }
}

TEST(RegIncBeta, EndpointsAndUniform) {
  EXPECT_EQ(reg_inc_beta(0.0, 2.5, 3.0), 0.0);
  EXPECT_EQ(reg_inc_beta(1.0, 2.5, 3.0), 1.0);
  EXPECT_NEAR(reg_inc_beta(0.5, 1.0, 1.0), 0.5, 1e-15);
  EXPECT_THROW(reg_inc_beta(1.5, 1, 1), std::domain_error);
  EXPECT_THROW(reg_inc_beta(0.5, 0, 1), std::domain_error);
}

TEST(RegIncBeta, BinomialIdentity) {
  for (int n = 1; n <= 60; ++n) {
    for (double x : {0.05, 0.3, 0.5, 0.64566, 0.9}) {
      for (int a = 1; a <= n; ++a) {
        const double want = static_cast<double>(binomial_tail_sum(n, a, x));
        EXPECT_NEAR(reg_inc_beta(x, a, n - a + 1), want, 1e-9) << n << " " << a << " " << x;
      }
    }
  }
}

TEST(Mud, OueThreshold) {
  EXPECT_DOUBLE_EQ(mud_threshold(Protocol::kOue, 0.6, 10000), 5500.0);
  EXPECT_THROW(mud_threshold(Protocol::kGrr, 0.6, 100), std::invalid_argument);
  EXPECT_THROW(mud_threshold(Protocol::kSw, 0.6, 100), std::invalid_argument);
}

TEST(Mud, ThresholdMatchesBinomialOracle) {
  for (int n = 1; n <= 200; n += 7) {
    for (auto [proto, eps] : {std::pair{Protocol::kOlh, 0.6}, std::pair{Protocol::kHst, 0.6},
                              std::pair{Protocol::kHst, 2.0}}) {
      const long double x = proto == Protocol::kOlh ? 0.5L : std::exp(eps) / (std::exp(eps) + 1.0);
      int tau = n + 1;
      for (int k = 1; k <= n; ++k) {
        if (binomial_tail_sum(n, k, x) <= 0.01L) {
          tau = k;
          break;
        }
      }
      EXPECT_EQ(mud_threshold(proto, eps, n), tau) << n;
    }
  }
}

TEST(Mud, ThresholdMonotoneInSignificance) {
  for (auto proto : {Protocol::kOue, Protocol::kOlh, Protocol::kHst}) {
    double prev = 0.0;
    for (double sig : {0.1, 0.05, 0.01, 0.001, 1e-6}) {
      const double t = mud_threshold(proto, 0.6, 5000, sig);
      EXPECT_GE(t, prev);
      prev = t;
    }
  }
}

TEST(Mud, NoSupportNoAlarm) {
  const auto m = make_mechanism(Protocol::kOue, Setting::kUser, 0.6);
  OueReports r(32);
  std::vector<std::uint64_t> zeros(r.words_per_report(), 0);
  for (int j = 0; j < 50; ++j) r.words.insert(r.words.end(), zeros.begin(), zeros.end());
  EXPECT_EQ(mud_support(r, m, nullptr), 0u);
  EXPECT_FALSE(mud_detect(r, m, nullptr));
}

TEST(Mud, OueModerateAttackSilent) {
  const auto data = sample_gaussian_dataset(100000, 0, 10, RngStream(7));
  const auto m = make_mechanism(Protocol::kOue, Setting::kUser, 0.6);
  const AttackSpec spec{Protocol::kOue, Setting::kUser, Strategy::kCrafted, 0.05};
  const auto ac = attacked_collection(data, m, spec, RngStream(8));
  EXPECT_FALSE(mud_detect(ac.collected.reports, m, nullptr));
}

TEST(Mud, OueLargeAttackRaisesSupport) {
  const auto data = sample_gaussian_dataset(100000, 0, 10, RngStream(9));
  const auto m = make_mechanism(Protocol::kOue, Setting::kUser, 0.2);
  double attacked = 0.0, clean = 0.0;
  int alarm_a = 0, alarm_c = 0;
  for (int t = 0; t < 10; ++t) {
    const AttackSpec atk{Protocol::kOue, Setting::kUser, Strategy::kCrafted, 0.10};
    const AttackSpec none{Protocol::kOue, Setting::kUser, Strategy::kCrafted, 0.0};
    const auto a = attacked_collection(data, m, atk, RngStream(100 + t));
    const auto c = attacked_collection(data, m, none, RngStream(200 + t));
    attacked += mud_support(a.collected.reports, m, nullptr);
    clean += mud_support(c.collected.reports, m, nullptr);
    alarm_a += mud_detect(a.collected.reports, m, nullptr);
    alarm_c += mud_detect(c.collected.reports, m, nullptr);
  }
  EXPECT_GT(attacked, clean);
  EXPECT_GE(alarm_a, alarm_c);
}

TEST(ZeroShot, DeterministicAndSerializable) {
  const auto m = make_mechanism(Protocol::kGrr, Setting::kUser, 0.6);
  const auto c = collect(sample_gaussian_dataset(20000, 0, 10, RngStream(10)), m, RngStream(11));
  const auto a = zero_shot_detect(c.reports, m, nullptr, RngStream(12));
  const auto b = zero_shot_detect(c.reports, m, nullptr, RngStream(12));
  EXPECT_EQ(a.g_ben, b.g_ben);
  EXPECT_EQ(a.g_det, b.g_det);
  EXPECT_EQ(a.p_value, b.p_value);
  EXPECT_EQ(a.g_ben.size(), 10u);
  EXPECT_EQ(a.polluted, a.p_value < 0.002);
  const auto back = verdict_from_json(json::parse(to_json(a).dump()));
  EXPECT_EQ(back.g_ben, a.g_ben);
  EXPECT_EQ(back.g_det, a.g_det);
  EXPECT_EQ(back.p_value, a.p_value);
  EXPECT_EQ(back.ks_stat, a.ks_stat);
  EXPECT_EQ(back.polluted, a.polluted);
  DetectOptions o;
  o.rounds = 1;
  EXPECT_THROW(zero_shot_detect(c.reports, m, nullptr, RngStream(1), o), std::invalid_argument);
}

TEST(ZeroShot, CleanOueRarelyFlagged) {
  const auto data = sample_gaussian_dataset(100000, 0, 10, RngStream(13));
  const auto m = make_mechanism(Protocol::kOue, Setting::kUser, 0.6);
  int unpolluted = 0;
  for (int t = 0; t < 100; ++t) {
    const auto c = collect(data, m, RngStream(1000 + t));
    unpolluted += !zero_shot_detect(c.reports, m, nullptr, RngStream(2000 + t)).polluted;
  }
  EXPECT_GE(unpolluted, 95);
}

double detection_auc(Protocol proto, Setting setting, Strategy strategy, int per_class,
                     std::uint64_t seed) {
  const auto data = sample_gaussian_dataset(100000, 0, 10, RngStream(seed));
  const auto m = make_mechanism(proto, setting, 0.6);
  std::vector<double> score;
  std::vector<bool> label;
  for (int t = 0; t < 2 * per_class; ++t) {
    const bool attacked = t < per_class;
    const AttackSpec spec{proto, setting, strategy, attacked ? 0.05 : 0.0};
    const auto ac = attacked_collection(data, m, spec, RngStream(seed).substream(t));
    const auto v = zero_shot_detect(ac.collected.reports, m, ac.collected.assignment_ptr(),
                                    RngStream(seed).substream(10000 + t));
    score.push_back(1.0 - v.p_value);
    label.push_back(attacked);
  }
  return roc_auc(score, label);
}

TEST(ZeroShot, OueAttackDetected) {
  EXPECT_GE(detection_auc(Protocol::kOue, Setting::kUser, Strategy::kCrafted, 50, 14), 0.95);
}

TEST(ZeroShot, BaselineLooksClean) {
  const double auc = detection_auc(Protocol::kGrr, Setting::kUser, Strategy::kBaseline, 25, 15);
  EXPECT_GE(auc, 0.35);
  EXPECT_LE(auc, 0.65);
}

}  // namespace
}  // namespace ldpshift
