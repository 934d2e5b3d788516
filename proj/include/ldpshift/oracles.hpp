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

#ifndef LDPSHIFT_ORACLES_HPP_
#define LDPSHIFT_ORACLES_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ldpshift/core.hpp"

namespace ldpshift {

enum class Setting { kUser, kServer };

inline const char* to_string(Setting s) {
  return s == Setting::kUser ? "user" : "server";
}

// ---------------------------------------------------------------------------
// Parameters.
// ---------------------------------------------------------------------------

struct GrrParams {
  int m_o;
  double epsilon;
  double p;
  double q;
};

inline GrrParams grr_params(int m_o, double epsilon) {
  static_cast<void>(BinSpec(m_o));
  const double e = PrivacyBudget(epsilon).exp_eps();
  return {m_o, epsilon, e / (e + m_o - 1), 1.0 / (e + m_o - 1)};
}

struct OueParams {
  int m_o;
  double epsilon;
  double p;
  double q;
};

inline OueParams oue_params(int m_o, double epsilon) {
  static_cast<void>(BinSpec(m_o));
  const double e = PrivacyBudget(epsilon).exp_eps();
  return {m_o, epsilon, 0.5, 1.0 / (e + 1.0)};
}

struct OlhParams {
  int m_o;
  int g;
  double epsilon;
  double p;
  double q;
};

inline int default_olh_g(double epsilon) {
  return static_cast<int>(std::floor(std::exp(epsilon) + 1.0));
}

// g = 0 selects the default floor(e^eps + 1).
inline OlhParams olh_params(int m_o, double epsilon, int g = 0) {
  static_cast<void>(BinSpec(m_o));
  const double e = PrivacyBudget(epsilon).exp_eps();
  if (g == 0) g = default_olh_g(epsilon);
  if (g < 2) throw std::invalid_argument("olh_params: g must be >= 2");
  return {m_o, g, epsilon, e / (e + g - 1), 1.0 / (e + g - 1)};
}

struct HstParams {
  int m_o;
  double epsilon;
  double c;
  double p_keep;
};

inline HstParams hst_params(int m_o, double epsilon) {
  static_cast<void>(BinSpec(m_o));
  const double e = PrivacyBudget(epsilon).exp_eps();
  return {m_o, epsilon, (e + 1.0) / (e - 1.0), e / (e + 1.0)};
}

// ---------------------------------------------------------------------------
// Single reports.
// ---------------------------------------------------------------------------

struct GrrReport {
  int index;
};

struct OueReport {
  std::vector<std::uint8_t> bits;  // length m_o, entries 0/1
};

struct OlhReport {
  std::uint64_t seed;
  int value;
};

// In the User setting the public vector travels with the report, either as
// the seed it was expanded from or as an explicit +-1 vector. In the Server
// setting the vector comes from the assignment and only `value` is used.
struct HstReport {
  std::uint64_t seed = 0;
  std::vector<std::int8_t> vector;  // empty: expand from `seed`
  double value = 0.0;
};

struct SwReport {
  double value;
};

using Report = std::variant<GrrReport, OueReport, OlhReport, HstReport, SwReport>;

/// Per-user seeds drawn by the server before collection.
struct ServerAssignment {
  std::vector<std::uint64_t> seeds;
  std::size_t n() const { return seeds.size(); }
};

inline ServerAssignment draw_assignment(std::size_t n, RngStream rng) {
  ServerAssignment a;
  a.seeds.resize(n);
  for (auto& s : a.seeds) s = rng();
  return a;
}

// ---------------------------------------------------------------------------
// Hash family and public vectors.
// ---------------------------------------------------------------------------

// Seed-independent half of the hash; callers hashing many seeds against the
// same inputs can precompute it.
inline std::uint64_t hash_key(int x) {
  return mix64(static_cast<std::uint64_t>(x) + 0x632be59bd9b4e019ULL);
}

inline int hash_with_key(std::uint64_t seed, std::uint64_t key, int g) {
  const std::uint64_t h = mix64(seed ^ key);
  return static_cast<int>((static_cast<unsigned __int128>(h) * g) >> 64) + 1;
}

/// Seeded hash H_seed : [1..m_o] -> [1..g].
inline int hash_map(std::uint64_t seed, int x, int g) {
  if (g < 2) throw std::invalid_argument("hash_map: g must be >= 2");
  return hash_with_key(seed, hash_key(x), g);
}

// Coordinate i (1-indexed) of the public vector expanded from `seed`.
inline int hst_coordinate(std::uint64_t seed, int i) {
  const int k = (i - 1) >> 6;
  const std::uint64_t word = mix64(seed ^ 0x5851f42d4c957f2dULL,
                                   static_cast<std::uint64_t>(k));
  return ((word >> ((i - 1) & 63)) & 1ULL) ? 1 : -1;
}

inline std::vector<std::int8_t> hst_vector(std::uint64_t seed, int m_o) {
  if (m_o < 2) throw std::invalid_argument("hst_vector: m_o must be >= 2");
  std::vector<std::int8_t> v(m_o);
  std::uint64_t word = 0;
  for (int i = 0; i < m_o; ++i) {
    if ((i & 63) == 0) {
      word = mix64(seed ^ 0x5851f42d4c957f2dULL, static_cast<std::uint64_t>(i >> 6));
    }
    v[i] = ((word >> (i & 63)) & 1ULL) ? 1 : -1;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Report batches. Struct-of-arrays containers used by collection, attacks,
// aggregation and detection.
// ---------------------------------------------------------------------------

struct GrrReports {
  std::vector<std::int32_t> index;
  std::size_t size() const { return index.size(); }
  void append(const GrrReports& o) {
    index.insert(index.end(), o.index.begin(), o.index.end());
  }
};

struct OueReports {
  int m_o = 0;
  std::vector<std::uint64_t> words;  // size() * words_per_report()

  OueReports() = default;
  explicit OueReports(int m) : m_o(m) {}

  int words_per_report() const { return (m_o + 63) / 64; }
  std::size_t size() const {
    return m_o == 0 ? 0 : words.size() / words_per_report();
  }
  // 1-indexed bit of report j.
  bool bit(std::size_t j, int i) const {
    const std::size_t w = j * words_per_report() + ((i - 1) >> 6);
    return (words[w] >> ((i - 1) & 63)) & 1ULL;
  }
  std::uint64_t* push_blank() {
    words.resize(words.size() + words_per_report(), 0);
    return words.data() + words.size() - words_per_report();
  }
  void append(const OueReports& o) {
    if (o.size() == 0) return;
    if (m_o == 0) m_o = o.m_o;
    if (o.m_o != m_o) throw std::invalid_argument("OueReports: length mismatch");
    words.insert(words.end(), o.words.begin(), o.words.end());
  }
};

struct OlhReports {
  std::vector<std::uint64_t> seed;
  std::vector<std::int32_t> value;
  std::size_t size() const { return value.size(); }
  void append(const OlhReports& o) {
    seed.insert(seed.end(), o.seed.begin(), o.seed.end());
    value.insert(value.end(), o.value.begin(), o.value.end());
  }
};

struct HstReports {
  int m_o = 0;
  std::vector<std::uint64_t> seed;
  std::vector<std::int8_t> sign;        // value = sign * c
  std::vector<std::int32_t> explicit_slot;  // -1: vector from seed
  std::vector<std::int8_t> explicit_vectors;  // m_o entries per slot

  HstReports() = default;
  explicit HstReports(int m) : m_o(m) {}

  std::size_t size() const { return sign.size(); }
  void push_seeded(std::uint64_t s, int sgn) {
    seed.push_back(s);
    sign.push_back(static_cast<std::int8_t>(sgn));
    explicit_slot.push_back(-1);
  }
  void push_explicit(std::span<const std::int8_t> v, int sgn) {
    if (static_cast<int>(v.size()) != m_o) {
      throw std::invalid_argument("HstReports: vector length mismatch");
    }
    seed.push_back(0);
    sign.push_back(static_cast<std::int8_t>(sgn));
    explicit_slot.push_back(static_cast<std::int32_t>(explicit_vectors.size() / m_o));
    explicit_vectors.insert(explicit_vectors.end(), v.begin(), v.end());
  }
  void append(const HstReports& o) {
    if (o.size() == 0) return;
    if (m_o == 0) m_o = o.m_o;
    if (o.m_o != m_o) throw std::invalid_argument("HstReports: length mismatch");
    const auto base = static_cast<std::int32_t>(explicit_vectors.size() / m_o);
    seed.insert(seed.end(), o.seed.begin(), o.seed.end());
    sign.insert(sign.end(), o.sign.begin(), o.sign.end());
    for (auto s : o.explicit_slot) explicit_slot.push_back(s < 0 ? s : s + base);
    explicit_vectors.insert(explicit_vectors.end(), o.explicit_vectors.begin(),
                            o.explicit_vectors.end());
  }
};

struct SwReports {
  std::vector<double> value;
  std::size_t size() const { return value.size(); }
  void append(const SwReports& o) {
    value.insert(value.end(), o.value.begin(), o.value.end());
  }
};

// Public-vector coordinate i of report j. Server setting reads the seed from
// the assignment; otherwise the report's own seed or explicit vector is used.
inline int hst_report_coordinate(const HstReports& r, std::size_t j, int i,
                                 const ServerAssignment* assignment) {
  if (assignment != nullptr) return hst_coordinate(assignment->seeds[j], i);
  const auto slot = r.explicit_slot[j];
  if (slot >= 0) {
    return r.explicit_vectors[static_cast<std::size_t>(slot) * r.m_o + (i - 1)];
  }
  return hst_coordinate(r.seed[j], i);
}

// ---------------------------------------------------------------------------
// Perturbation.
// ---------------------------------------------------------------------------

inline void check_bin(int x_b, int m_o, const char* who) {
  if (x_b < 1 || x_b > m_o) {
    throw std::invalid_argument(std::string(who) + ": bin index out of range");
  }
}

inline GrrReport grr_perturb(int x_b, const GrrParams& params, RngStream& rng) {
  check_bin(x_b, params.m_o, "grr_perturb");
  if (rng.bernoulli(params.p)) return {x_b};
  int y = static_cast<int>(rng.below(params.m_o - 1)) + 1;
  if (y >= x_b) ++y;
  return {y};
}

namespace detail {

// Fills `words` with independent Bernoulli(q) bits for positions 1..m.
inline void bernoulli_bits(std::uint64_t* words, int m, double q, RngStream& rng) {
  const double scale = 4294967296.0;
  const double threshold = q * scale;
  for (int i = 0; i < m; i += 2) {
    const std::uint64_t r = rng();
    if (static_cast<double>(r & 0xffffffffULL) < threshold) {
      words[i >> 6] |= 1ULL << (i & 63);
    }
    if (i + 1 < m && static_cast<double>(r >> 32) < threshold) {
      words[(i + 1) >> 6] |= 1ULL << ((i + 1) & 63);
    }
  }
}

inline void oue_perturb_into(std::uint64_t* words, int x_b, const OueParams& params,
                             RngStream& rng) {
  bernoulli_bits(words, params.m_o, params.q, rng);
  const int k = x_b - 1;
  const std::uint64_t mask = 1ULL << (k & 63);
  if (rng.bernoulli(params.p)) {
    words[k >> 6] |= mask;
  } else {
    words[k >> 6] &= ~mask;
  }
}

}  // namespace detail

inline OueReport oue_perturb(int x_b, const OueParams& params, RngStream& rng) {
  check_bin(x_b, params.m_o, "oue_perturb");
  std::vector<std::uint64_t> words((params.m_o + 63) / 64, 0);
  detail::oue_perturb_into(words.data(), x_b, params, rng);
  OueReport r;
  r.bits.resize(params.m_o);
  for (int i = 0; i < params.m_o; ++i) r.bits[i] = (words[i >> 6] >> (i & 63)) & 1ULL;
  return r;
}

// `seed` is the hash seed: fresh per user in the User setting, assigned in
// the Server setting.
inline OlhReport olh_perturb_with_seed(int x_b, std::uint64_t seed,
                                       const OlhParams& params, RngStream& rng) {
  check_bin(x_b, params.m_o, "olh_perturb");
  const int h = hash_map(seed, x_b, params.g);
  if (rng.bernoulli(params.p)) return {seed, h};
  int y = static_cast<int>(rng.below(params.g - 1)) + 1;
  if (y >= h) ++y;
  return {seed, y};
}

inline OlhReport olh_perturb(int x_b, const OlhParams& params, Setting setting,
                             const ServerAssignment* assignment, std::size_t user,
                             RngStream& rng) {
  if (setting == Setting::kServer) {
    if (assignment == nullptr || user >= assignment->n()) {
      throw std::invalid_argument("olh_perturb: server setting needs an assignment");
    }
    return olh_perturb_with_seed(x_b, assignment->seeds[user], params, rng);
  }
  const std::uint64_t seed = rng();
  return olh_perturb_with_seed(x_b, seed, params, rng);
}

inline int hst_perturb_sign(int coordinate, const HstParams& params, RngStream& rng) {
  return rng.bernoulli(params.p_keep) ? coordinate : -coordinate;
}

inline HstReport hst_perturb(int x_b, const HstParams& params, Setting setting,
                             const ServerAssignment* assignment, std::size_t user,
                             RngStream& rng) {
  check_bin(x_b, params.m_o, "hst_perturb");
  HstReport r;
  if (setting == Setting::kServer) {
    if (assignment == nullptr || user >= assignment->n()) {
      throw std::invalid_argument("hst_perturb: server setting needs an assignment");
    }
    r.seed = assignment->seeds[user];
  } else {
    r.seed = rng();
  }
  r.value = params.c * hst_perturb_sign(hst_coordinate(r.seed, x_b), params, rng);
  return r;
}

// ---------------------------------------------------------------------------
// Aggregation.
// ---------------------------------------------------------------------------

inline Histogram grr_aggregate(const GrrReports& reports, const GrrParams& params) {
  if (reports.size() == 0) throw std::invalid_argument("grr_aggregate: no reports");
  std::vector<double> count(params.m_o, 0.0);
  for (auto y : reports.index) {
    check_bin(y, params.m_o, "grr_aggregate");
    count[y - 1] += 1.0;
  }
  const double n = static_cast<double>(reports.size());
  for (auto& c : count) c = (c - n * params.q) / (n * (params.p - params.q));
  return Histogram::raw(BinSpec(params.m_o), std::move(count));
}

inline std::vector<double> oue_bit_counts(const OueReports& reports) {
  std::vector<double> count(reports.m_o, 0.0);
  const int w = reports.words_per_report();
  std::vector<std::uint64_t> tally(reports.m_o, 0);
  for (std::size_t j = 0; j < reports.size(); ++j) {
    const std::uint64_t* row = reports.words.data() + j * w;
    for (int k = 0; k < w; ++k) {
      std::uint64_t bits = row[k];
      while (bits) {
        const int b = __builtin_ctzll(bits);
        ++tally[k * 64 + b];
        bits &= bits - 1;
      }
    }
  }
  for (int i = 0; i < reports.m_o; ++i) count[i] = static_cast<double>(tally[i]);
  return count;
}

inline Histogram oue_aggregate(const OueReports& reports, const OueParams& params) {
  if (reports.size() == 0) throw std::invalid_argument("oue_aggregate: no reports");
  if (reports.m_o != params.m_o) {
    throw std::invalid_argument("oue_aggregate: vector length mismatch");
  }
  auto count = oue_bit_counts(reports);
  const double n = static_cast<double>(reports.size());
  for (auto& c : count) c = (c - n * params.q) / (n * (params.p - params.q));
  return Histogram::raw(BinSpec(params.m_o), std::move(count));
}

// C(B_i) = |{j : H_j(i) = y_j}|.
inline std::vector<double> olh_support_counts(const OlhReports& reports,
                                              const OlhParams& params,
                                              const ServerAssignment* assignment) {
  if (assignment != nullptr && assignment->n() != reports.size()) {
    throw std::invalid_argument("olh: assignment size does not match reports");
  }
  std::vector<std::uint64_t> tally(params.m_o, 0);
  std::vector<std::uint64_t> keys(params.m_o);
  for (int i = 1; i <= params.m_o; ++i) keys[i - 1] = hash_key(i);
  for (std::size_t j = 0; j < reports.size(); ++j) {
    const int y = reports.value[j];
    if (y < 1 || y > params.g) throw std::invalid_argument("olh: value outside [1..g]");
    const std::uint64_t s = assignment ? assignment->seeds[j] : reports.seed[j];
    for (int i = 0; i < params.m_o; ++i) {
      if (hash_with_key(s, keys[i], params.g) == y) ++tally[i];
    }
  }
  return std::vector<double>(tally.begin(), tally.end());
}

inline Histogram olh_aggregate(const OlhReports& reports, const OlhParams& params,
                               Setting setting,
                               const ServerAssignment* assignment = nullptr) {
  if (reports.size() == 0) throw std::invalid_argument("olh_aggregate: no reports");
  if (setting == Setting::kServer && assignment == nullptr) {
    throw std::invalid_argument("olh_aggregate: server setting needs an assignment");
  }
  auto count = olh_support_counts(
      reports, params, setting == Setting::kServer ? assignment : nullptr);
  const double n = static_cast<double>(reports.size());
  const double inv_g = 1.0 / params.g;
  for (auto& c : count) c = (c - n * inv_g) / (n * (params.p - inv_g));
  return Histogram::raw(BinSpec(params.m_o), std::move(count));
}

// Sum over users of sign_j * s_j[i]; the estimate is c times this over n.
inline std::vector<double> hst_signed_sums(const HstReports& reports,
                                           const ServerAssignment* assignment) {
  if (assignment != nullptr && assignment->n() != reports.size()) {
    throw std::invalid_argument("hst: assignment size does not match reports");
  }
  const int m = reports.m_o;
  std::vector<std::int64_t> acc(m, 0);
  for (std::size_t j = 0; j < reports.size(); ++j) {
    const int sgn = reports.sign[j];
    const auto slot = reports.explicit_slot[j];
    if (assignment == nullptr && slot >= 0) {
      const std::int8_t* v = reports.explicit_vectors.data() +
                             static_cast<std::size_t>(slot) * m;
      for (int i = 0; i < m; ++i) acc[i] += sgn * v[i];
      continue;
    }
    const std::uint64_t s = assignment ? assignment->seeds[j] : reports.seed[j];
    std::uint64_t word = 0;
    for (int i = 0; i < m; ++i) {
      if ((i & 63) == 0) {
        word = mix64(s ^ 0x5851f42d4c957f2dULL, static_cast<std::uint64_t>(i >> 6));
      }
      acc[i] += ((word >> (i & 63)) & 1ULL) ? sgn : -sgn;
    }
  }
  return std::vector<double>(acc.begin(), acc.end());
}

inline Histogram hst_aggregate(const HstReports& reports, const HstParams& params,
                               Setting setting,
                               const ServerAssignment* assignment = nullptr) {
  if (reports.size() == 0) throw std::invalid_argument("hst_aggregate: no reports");
  if (reports.m_o != params.m_o) {
    throw std::invalid_argument("hst_aggregate: vector length mismatch");
  }
  if (setting == Setting::kServer && assignment == nullptr) {
    throw std::invalid_argument("hst_aggregate: server setting needs an assignment");
  }
  auto sums = hst_signed_sums(reports,
                              setting == Setting::kServer ? assignment : nullptr);
  const double n = static_cast<double>(reports.size());
  for (auto& v : sums) v = params.c * v / n;
  return Histogram::raw(BinSpec(params.m_o), std::move(sums));
}

// ---------------------------------------------------------------------------
// Conversions between single reports and batches.
// ---------------------------------------------------------------------------

template <typename T>
const T& expect_variant(const Report& r, const char* who) {
  const T* p = std::get_if<T>(&r);
  if (p == nullptr) {
    throw std::invalid_argument(std::string(who) + ": mixed report variants");
  }
  return *p;
}

inline GrrReports to_grr_batch(std::span<const Report> reports) {
  GrrReports out;
  for (const auto& r : reports) out.index.push_back(expect_variant<GrrReport>(r, "grr").index);
  return out;
}

inline OueReports to_oue_batch(std::span<const Report> reports, int m_o) {
  OueReports out(m_o);
  for (const auto& r : reports) {
    const auto& o = expect_variant<OueReport>(r, "oue");
    if (static_cast<int>(o.bits.size()) != m_o) {
      throw std::invalid_argument("oue: vector length mismatch");
    }
    std::uint64_t* w = out.push_blank();
    for (int i = 0; i < m_o; ++i) {
      if (o.bits[i]) w[i >> 6] |= 1ULL << (i & 63);
    }
  }
  return out;
}

inline OlhReports to_olh_batch(std::span<const Report> reports) {
  OlhReports out;
  for (const auto& r : reports) {
    const auto& o = expect_variant<OlhReport>(r, "olh");
    out.seed.push_back(o.seed);
    out.value.push_back(o.value);
  }
  return out;
}

inline HstReports to_hst_batch(std::span<const Report> reports, const HstParams& params) {
  HstReports out(params.m_o);
  for (const auto& r : reports) {
    const auto& h = expect_variant<HstReport>(r, "hst");
    int sgn = 0;
    if (std::abs(h.value - params.c) <= 1e-9 * params.c) {
      sgn = 1;
    } else if (std::abs(h.value + params.c) <= 1e-9 * params.c) {
      sgn = -1;
    } else {
      throw std::invalid_argument("hst: signed value must be +c or -c");
    }
    if (h.vector.empty()) {
      out.push_seeded(h.seed, sgn);
    } else {
      out.push_explicit(h.vector, sgn);
    }
  }
  return out;
}

inline Report report_at(const GrrReports& b, std::size_t j) {
  return GrrReport{b.index[j]};
}
inline Report report_at(const OueReports& b, std::size_t j) {
  OueReport r;
  r.bits.resize(b.m_o);
  for (int i = 1; i <= b.m_o; ++i) r.bits[i - 1] = b.bit(j, i);
  return r;
}
inline Report report_at(const OlhReports& b, std::size_t j) {
  return OlhReport{b.seed[j], b.value[j]};
}
inline Report report_at(const HstReports& b, std::size_t j, double c) {
  HstReport r;
  r.seed = b.seed[j];
  r.value = c * b.sign[j];
  if (b.explicit_slot[j] >= 0) {
    const auto* v = b.explicit_vectors.data() +
                    static_cast<std::size_t>(b.explicit_slot[j]) * b.m_o;
    r.vector.assign(v, v + b.m_o);
  }
  return r;
}
inline Report report_at(const SwReports& b, std::size_t j) {
  return SwReport{b.value[j]};
}

// ---------------------------------------------------------------------------
// Honest collection.
// ---------------------------------------------------------------------------

/// Reports of one collection round plus the server's assignment, if any.
template <typename Batch>
struct Collection {
  Batch reports;
  std::optional<ServerAssignment> assignment;
};

// Users are indexed 0..n-1; user j draws from rng.substream(j). The
// assignment, when present, may be longer than the dataset (fake users are
// appended after the honest ones).
inline GrrReports grr_collect(std::span<const int> bins, const GrrParams& params,
                              RngStream rng) {
  GrrReports out;
  out.index.resize(bins.size());
  for (std::size_t j = 0; j < bins.size(); ++j) {
    auto r = rng.substream(j);
    out.index[j] = grr_perturb(bins[j], params, r).index;
  }
  return out;
}

inline OueReports oue_collect(std::span<const int> bins, const OueParams& params,
                              RngStream rng) {
  OueReports out(params.m_o);
  out.words.assign(bins.size() * out.words_per_report(), 0);
  for (std::size_t j = 0; j < bins.size(); ++j) {
    check_bin(bins[j], params.m_o, "oue_perturb");
    auto r = rng.substream(j);
    detail::oue_perturb_into(out.words.data() + j * out.words_per_report(), bins[j],
                             params, r);
  }
  return out;
}

inline OlhReports olh_collect(std::span<const int> bins, const OlhParams& params,
                              Setting setting, const ServerAssignment* assignment,
                              RngStream rng) {
  OlhReports out;
  out.seed.resize(bins.size());
  out.value.resize(bins.size());
  for (std::size_t j = 0; j < bins.size(); ++j) {
    auto r = rng.substream(j);
    const auto rep = olh_perturb(bins[j], params, setting, assignment, j, r);
    out.seed[j] = rep.seed;
    out.value[j] = rep.value;
  }
  return out;
}

inline HstReports hst_collect(std::span<const int> bins, const HstParams& params,
                              Setting setting, const ServerAssignment* assignment,
                              RngStream rng) {
  HstReports out(params.m_o);
  out.seed.reserve(bins.size());
  out.sign.reserve(bins.size());
  out.explicit_slot.reserve(bins.size());
  for (std::size_t j = 0; j < bins.size(); ++j) {
    auto r = rng.substream(j);
    const auto rep = hst_perturb(bins[j], params, setting, assignment, j, r);
    out.push_seeded(rep.seed, rep.value > 0 ? 1 : -1);
  }
  return out;
}

inline std::vector<int> bin_indices(const Dataset& data, const BinSpec& bins) {
  std::vector<int> out(data.n());
  for (std::size_t j = 0; j < data.n(); ++j) out[j] = bin_of(data[j], bins);
  return out;
}

// ---------------------------------------------------------------------------
// Privacy ratio checks, evaluated from the closed-form output probabilities.
// ---------------------------------------------------------------------------

inline double grr_output_probability(const GrrParams& params, int x, int y) {
  return x == y ? params.p : params.q;
}

// Probability of an entire OUE bit vector given input x.
inline double oue_output_probability(const OueParams& params, int x,
                                     std::span<const std::uint8_t> bits) {
  double pr = 1.0;
  for (int i = 1; i <= params.m_o; ++i) {
    const double on = (i == x) ? params.p : params.q;
    pr *= bits[i - 1] ? on : 1.0 - on;
  }
  return pr;
}

inline double olh_output_probability(const OlhParams& params, std::uint64_t seed,
                                     int x, int y) {
  return hash_map(seed, x, params.g) == y ? params.p : params.q;
}

inline double hst_output_probability(const HstParams& params, int coordinate, int sign) {
  return coordinate == sign ? params.p_keep : 1.0 - params.p_keep;
}

/// Largest Pr[out | x] / Pr[out | x'] over all inputs and enumerable outputs.
inline double max_ratio(const GrrParams& params) {
  double worst = 0.0;
  for (int x = 1; x <= params.m_o; ++x)
    for (int x2 = 1; x2 <= params.m_o; ++x2)
      for (int y = 1; y <= params.m_o; ++y)
        worst = std::max(worst, grr_output_probability(params, x, y) /
                                    grr_output_probability(params, x2, y));
  return worst;
}

// Full enumeration of the 2^m_o output vectors; intended for small m_o.
inline double max_ratio(const OueParams& params) {
  if (params.m_o > 16) throw std::invalid_argument("max_ratio(OUE): m_o too large");
  double worst = 0.0;
  std::vector<std::uint8_t> bits(params.m_o);
  for (std::uint32_t mask = 0; mask < (1u << params.m_o); ++mask) {
    for (int i = 0; i < params.m_o; ++i) bits[i] = (mask >> i) & 1u;
    double lo = 1.0, hi = 0.0;
    for (int x = 1; x <= params.m_o; ++x) {
      const double pr = oue_output_probability(params, x, bits);
      lo = std::min(lo, pr);
      hi = std::max(hi, pr);
    }
    worst = std::max(worst, hi / lo);
  }
  return worst;
}

inline double max_ratio(const OlhParams& params, std::span<const std::uint64_t> seeds) {
  double worst = 0.0;
  for (auto s : seeds)
    for (int y = 1; y <= params.g; ++y) {
      double lo = 1.0, hi = 0.0;
      for (int x = 1; x <= params.m_o; ++x) {
        const double pr = olh_output_probability(params, s, x, y);
        lo = std::min(lo, pr);
        hi = std::max(hi, pr);
      }
      worst = std::max(worst, hi / lo);
    }
  return worst;
}

inline double max_ratio(const HstParams& params, std::span<const std::uint64_t> seeds) {
  double worst = 0.0;
  for (auto s : seeds) {
    const auto v = hst_vector(s, params.m_o);
    for (int sign : {-1, 1}) {
      double lo = 1.0, hi = 0.0;
      for (int x = 1; x <= params.m_o; ++x) {
        const double pr = hst_output_probability(params, v[x - 1], sign);
        lo = std::min(lo, pr);
        hi = std::max(hi, pr);
      }
      worst = std::max(worst, hi / lo);
    }
  }
  return worst;
}

}  // namespace ldpshift

#endif  // LDPSHIFT_ORACLES_HPP_
