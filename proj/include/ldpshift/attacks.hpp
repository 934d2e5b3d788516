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

#ifndef LDPSHIFT_ATTACKS_HPP_
#define LDPSHIFT_ATTACKS_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ldpshift/mechanism.hpp"
#include "ldpshift/metrics.hpp"

namespace ldpshift {

enum class Strategy {
  kCrafted,   // the protocol-specific attack
  kBaseline,  // honest perturbation of the maximum input
  kPadded,    // OUE-Pad
};

enum class SwRange { kRightmostBin, kHighThird, kAboveOne, kFullHigh };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kCrafted: return "crafted";
    case Strategy::kBaseline: return "baseline";
    case Strategy::kPadded: return "pad";
  }
  return "?";
}

inline const char* to_string(SwRange r) {
  switch (r) {
    case SwRange::kRightmostBin: return "rightmost-bin";
    case SwRange::kHighThird: return "high-third";
    case SwRange::kAboveOne: return "above-one";
    case SwRange::kFullHigh: return "full-high";
  }
  return "?";
}

inline SwRange parse_sw_range(std::string_view s) {
  if (s == "rightmost-bin") return SwRange::kRightmostBin;
  if (s == "high-third") return SwRange::kHighThird;
  if (s == "above-one") return SwRange::kAboveOne;
  if (s == "full-high") return SwRange::kFullHigh;
  throw std::invalid_argument("unknown sw range '" + std::string(s) + "'");
}

struct AttackSpec {
  Protocol protocol = Protocol::kGrr;
  Setting setting = Setting::kUser;
  Strategy strategy = Strategy::kCrafted;
  double beta = 0.05;
  SwRange sw_range = SwRange::kFullHigh;

  // Short label such as "olh-user", "oue-pad" or "sw-full-high".
  std::string label() const {
    std::string s = to_string(protocol);
    if (strategy == Strategy::kPadded) s += "-pad";
    if (has_setting(protocol)) s += std::string("-") + to_string(setting);
    if (protocol == Protocol::kSw && strategy == Strategy::kCrafted) {
      s += std::string("-") + to_string(sw_range);
    }
    if (strategy == Strategy::kBaseline) s += "-baseline";
    return s;
  }

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("attack: beta outside [0, 1]");
    }
    if (strategy == Strategy::kPadded && protocol != Protocol::kOue) {
      throw std::invalid_argument("attack: padding applies to OUE only");
    }
  }
};

inline std::size_t fake_count(std::size_t n, double beta) {
  return static_cast<std::size_t>(std::llround(beta * static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// Fake report generators.
// ---------------------------------------------------------------------------

inline GrrReports attack_grr(const GrrParams& params, std::size_t n_f) {
  GrrReports out;
  out.index.assign(n_f, params.m_o);
  return out;
}

inline OueReports attack_oue(const OueParams& params, std::size_t n_f) {
  OueReports out(params.m_o);
  const int k = params.m_o - 1;
  for (std::size_t j = 0; j < n_f; ++j) out.push_blank()[k >> 6] |= 1ULL << (k & 63);
  return out;
}

// Extra one-bits per padded report.
inline int oue_pad_length(const OueParams& params) {
  return static_cast<int>(std::floor((params.m_o - 1) / (std::exp(params.epsilon) + 1.0) - 0.5));
}

inline OueReports attack_oue_pad(const OueParams& params, std::size_t n_f, RngStream rng) {
  const int l = oue_pad_length(params);
  if (l <= 0) return attack_oue(params, n_f);
  OueReports out(params.m_o);
  std::vector<int> others(params.m_o - 1);
  for (std::size_t j = 0; j < n_f; ++j) {
    auto r = rng.substream(j);
    std::uint64_t* w = out.push_blank();
    const int k = params.m_o - 1;
    w[k >> 6] |= 1ULL << (k & 63);
    for (int i = 0; i < params.m_o - 1; ++i) others[i] = i;
    for (int t = 0; t < l; ++t) {
      const int pick = t + static_cast<int>(r.below(params.m_o - 1 - t));
      std::swap(others[t], others[pick]);
      w[others[t] >> 6] |= 1ULL << (others[t] & 63);
    }
  }
  return out;
}

// User setting: explicit vector [-1, ..., -1, +1] with value +c. Server
// setting: value c * s_j[m_o] under the assigned vector of fake user
// `first_user + j`.
inline HstReports attack_hst(const HstParams& params, Setting setting,
                             const ServerAssignment* assignment, std::size_t first_user,
                             std::size_t n_f) {
  HstReports out(params.m_o);
  if (setting == Setting::kUser) {
    std::vector<std::int8_t> v(params.m_o, -1);
    v.back() = 1;
    for (std::size_t j = 0; j < n_f; ++j) out.push_explicit(v, 1);
    return out;
  }
  if (assignment == nullptr || first_user + n_f > assignment->n()) {
    throw std::invalid_argument("attack_hst: server setting needs an assignment");
  }
  for (std::size_t j = 0; j < n_f; ++j) {
    const std::uint64_t s = assignment->seeds[first_user + j];
    out.push_seeded(s, hst_coordinate(s, params.m_o));
  }
  return out;
}

/// For each fake user, samples `pool_size` hash seeds and keeps the one whose
/// preimage of y = H(m_o) has the largest mean bin index (lowest seed wins
/// ties).
inline OlhReports attack_olh_user(const OlhParams& params, std::size_t n_f,
                                  RngStream rng, int pool_size = 1000) {
  if (pool_size < 1) throw std::invalid_argument("attack_olh_user: pool_size < 1");
  std::vector<std::uint64_t> keys(params.m_o);
  for (int i = 1; i <= params.m_o; ++i) keys[i - 1] = hash_key(i);
  OlhReports out;
  out.seed.reserve(n_f);
  out.value.reserve(n_f);
  for (std::size_t j = 0; j < n_f; ++j) {
    auto r = rng.substream(j);
    std::uint64_t best_seed = 0;
    int best_value = 0;
    // Compare means as sum/count fractions to keep ties exact.
    long best_sum = -1, best_count = 1;
    for (int t = 0; t < pool_size; ++t) {
      const std::uint64_t s = r();
      const int y = hash_with_key(s, keys[params.m_o - 1], params.g);
      long sum = params.m_o, count = 1;
      for (int i = 0; i + 1 < params.m_o; ++i) {
        const long hit = hash_with_key(s, keys[i], params.g) == y;
        sum += hit * (i + 1);
        count += hit;
      }
      const long lhs = sum * best_count;
      const long rhs = best_sum * count;
      if (best_sum < 0 || lhs > rhs || (lhs == rhs && s < best_seed)) {
        best_seed = s;
        best_value = y;
        best_sum = sum;
        best_count = count;
      }
    }
    out.seed.push_back(best_seed);
    out.value.push_back(best_value);
  }
  return out;
}

inline OlhReports attack_olh_server(const OlhParams& params, const ServerAssignment& assignment,
                                    std::size_t first_user, std::size_t n_f) {
  if (first_user + n_f > assignment.n()) {
    throw std::invalid_argument("attack_olh_server: assignment too short");
  }
  OlhReports out;
  for (std::size_t j = 0; j < n_f; ++j) {
    const std::uint64_t s = assignment.seeds[first_user + j];
    out.seed.push_back(s);
    out.value.push_back(hash_map(s, params.m_o, params.g));
  }
  return out;
}

// Interval the SW fake values are drawn from.
inline std::pair<double, double> sw_attack_interval(const SwParams& params, SwRange range) {
  const double b = params.b;
  switch (range) {
    case SwRange::kRightmostBin:
      return {params.lo() + static_cast<double>(params.output_cells() - 1) / params.m_s,
              params.hi()};
    case SwRange::kHighThird: return {1.0 + 2.0 * b / 3.0, 1.0 + b};
    case SwRange::kAboveOne: return {1.0, 1.0 + b};
    case SwRange::kFullHigh: return {1.0 - b, 1.0 + b};
  }
  return {params.hi(), params.hi()};
}

inline SwReports attack_sw(const SwParams& params, SwRange range, std::size_t n_f,
                           RngStream rng) {
  const auto [lo, hi] = sw_attack_interval(params, range);
  SwReports out;
  out.value.resize(n_f);
  for (auto& v : out.value) v = std::min(rng.uniform(lo, hi), params.hi());
  return out;
}

/// n_f honest perturbations of the maximum input (bin m_o, or 1.0 for SW).
inline ReportSet baseline_attack(const Mechanism& m, std::size_t n_f, RngStream rng,
                                 const ServerAssignment* assignment = nullptr,
                                 std::size_t first_user = 0) {
  if (m.protocol == Protocol::kSw) {
    SwReports out;
    out.value.resize(n_f);
    for (std::size_t j = 0; j < n_f; ++j) {
      auto r = rng.substream(j);
      out.value[j] = sw_perturb(1.0, m.sw, r).value;
    }
    return out;
  }
  if (m.server()) {
    if (assignment == nullptr || first_user + n_f > assignment->n()) {
      throw std::invalid_argument("baseline_attack: server setting needs an assignment");
    }
    // Fake user j takes the assigned seed of user first_user + j.
    ServerAssignment slice;
    slice.seeds.assign(assignment->seeds.begin() + first_user,
                       assignment->seeds.begin() + first_user + n_f);
    const std::vector<int> bins(n_f, m.m_o);
    return perturb_bins(bins, m, &slice, rng);
  }
  const std::vector<int> bins(n_f, m.m_o);
  return perturb_bins(bins, m, nullptr, rng);
}

/// Fake reports for users first_user .. first_user + n_f - 1.
inline ReportSet fake_reports(const Mechanism& m, const AttackSpec& spec, std::size_t n_f,
                              const ServerAssignment* assignment, std::size_t first_user,
                              RngStream rng) {
  if (spec.strategy == Strategy::kBaseline) {
    return baseline_attack(m, n_f, rng, assignment, first_user);
  }
  switch (m.protocol) {
    case Protocol::kGrr: return attack_grr(m.grr, n_f);
    case Protocol::kOue:
      if (spec.strategy == Strategy::kPadded) return attack_oue_pad(m.oue, n_f, rng);
      return attack_oue(m.oue, n_f);
    case Protocol::kOlh:
      if (m.setting == Setting::kServer) {
        if (assignment == nullptr) {
          throw std::invalid_argument("attack_olh_server: missing assignment");
        }
        return attack_olh_server(m.olh, *assignment, first_user, n_f);
      }
      return attack_olh_user(m.olh, n_f, rng);
    case Protocol::kHst: return attack_hst(m.hst, m.setting, assignment, first_user, n_f);
    case Protocol::kSw: return attack_sw(m.sw, spec.sw_range, n_f, rng);
  }
  throw std::invalid_argument("fake_reports: unknown protocol");
}

/// Honest reports for the first n_g users of `data` followed by n_f fake ones.
struct AttackedCollection {
  Collected collected;
  Histogram truth;  // empirical histogram of the honest users on the m_o grid
  std::size_t n_f = 0;
};

// Splits of the per-trial stream.
namespace stream_tag {
inline constexpr std::uint64_t kHonest = 1;
inline constexpr std::uint64_t kFake = 2;
inline constexpr std::uint64_t kDetect = 3;
inline constexpr std::uint64_t kData = 4;
}  // namespace stream_tag

inline Dataset honest_part(const Dataset& data, std::size_t n_g) {
  if (n_g == 0) throw std::invalid_argument("attack: no honest users left");
  auto v = data.values();
  return Dataset(std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_g)));
}

inline AttackedCollection attacked_collection(const Dataset& data, const Mechanism& m,
                                              const AttackSpec& spec, RngStream rng) {
  spec.validate();
  if (spec.protocol != m.protocol) {
    throw std::invalid_argument("attack: protocol does not match mechanism");
  }
  const std::size_t n = data.n();
  const std::size_t n_f = fake_count(n, spec.beta);
  const Dataset honest = honest_part(data, n - n_f);
  AttackedCollection out{{}, empirical_histogram(honest, m.bins()), n_f};
  out.collected = collect(honest, m, rng.substream(stream_tag::kHonest), n);
  if (n_f > 0) {
    append_reports(out.collected.reports,
                   fake_reports(m, spec, n_f, out.collected.assignment_ptr(), n - n_f,
                                rng.substream(stream_tag::kFake)));
  }
  return out;
}

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::string attack;
  double epsilon = 0.0;
  double beta = 0.0;
  std::size_t n = 0;
  std::size_t n_f = 0;
  std::vector<double> truth;
  std::vector<double> estimate;
  double asg = 0.0;
  std::optional<double> sgr;
  double w1 = 0.0;
  // ASG of the raw (pre-consistency) estimate; CFOs only.
  std::optional<double> raw_asg;
};

/// One Monte-Carlo trial: collection, fake injection, estimation, metrics.
inline TrialRecord run_attacked_trial(const Dataset& data, const Mechanism& m,
                                      const AttackSpec& spec, RngStream rng,
                                      std::uint64_t trial = 0) {
  const auto ac = attacked_collection(data, m, spec, rng);
  const auto* a = ac.collected.assignment_ptr();
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = rng.seed();
  rec.attack = spec.label();
  rec.epsilon = m.epsilon;
  rec.beta = spec.beta;
  rec.n = data.n();
  rec.n_f = ac.n_f;
  const Histogram est = estimate(ac.collected.reports, m, a);
  const auto metrics = compute_metrics(ac.truth, est, spec.beta);
  rec.truth = ac.truth.values();
  rec.estimate = est.values();
  rec.asg = metrics.asg;
  rec.sgr = metrics.sgr;
  rec.w1 = metrics.w1;
  if (m.protocol != Protocol::kSw) {
    rec.raw_asg = asg(ac.truth.f(), raw_estimate(ac.collected.reports, m, a).f());
  }
  return rec;
}

}  // namespace ldpshift

#endif  // LDPSHIFT_ATTACKS_HPP_
