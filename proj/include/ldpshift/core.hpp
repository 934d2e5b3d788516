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

#ifndef LDPSHIFT_CORE_HPP_
#define LDPSHIFT_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string_view>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldpshift {

// ---------------------------------------------------------------------------
// Seed mixing and the deterministic random stream.
// ---------------------------------------------------------------------------

// SplitMix64 finalizer. Used for seed derivation and as the avalanche step of
// the seeded hash family.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

// Combines an arbitrary list of 64-bit words into one seed. Order matters.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(base);
  for (auto w : path) s = mix64(s, w);
  return s;
}

// Stable 64-bit FNV-1a over bytes; used to turn labels into seed-path words.
inline std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic pseudo-random stream (xoshiro256++ state seeded through
/// SplitMix64). Satisfies UniformRandomBitGenerator so it can drive the
/// standard distributions. Identical seeds give bit-identical sequences.
///
/// Substreams are derived from (seed, path...) without touching the parent's
/// state, so per-trial and per-user streams do not depend on execution order.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      w = mix64(x);
      x += 0x9e3779b97f4a7c15ULL;
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  std::uint64_t seed() const { return seed_; }

  RngStream substream(std::uint64_t a) const {
    return RngStream(derive_seed(seed_, {a}));
  }
  RngStream substream(std::uint64_t a, std::uint64_t b) const {
    return RngStream(derive_seed(seed_, {a, b}));
  }
  std::uint64_t substream_seed(std::uint64_t a) const {
    return derive_seed(seed_, {a});
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  // Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept {
    unsigned __int128 m =
        static_cast<unsigned __int128>((*this)()) * static_cast<unsigned __int128>(n);
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * static_cast<unsigned __int128>(n);
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t s_[4]{};
};

// ---------------------------------------------------------------------------
// Domain types.
// ---------------------------------------------------------------------------

/// Equal-width partition of [0, 1] into m bins. Bins are 1-indexed at every
/// interface: bin i covers [(i-1)/m, i/m), and bin m is closed at 1.
class BinSpec {
 public:
  explicit BinSpec(int m) : m_(m) {
    if (m < 2) throw std::invalid_argument("BinSpec: m must be >= 2");
  }
  int m() const { return m_; }
  double width() const { return 1.0 / m_; }
  double center(int bin) const { return (bin - 0.5) / m_; }
  bool operator==(const BinSpec&) const = default;

 private:
  int m_;
};

enum class HistogramKind { kRaw, kConsistent };

/// Frequency vector over a BinSpec. Raw histograms carry LDP estimates and
/// may be negative or not sum to one; Consistent ones lie on the simplex.
class Histogram {
 public:
  static constexpr double kSimplexTolerance = 1e-9;

  Histogram(BinSpec bins, std::vector<double> f, HistogramKind kind)
      : bins_(bins), f_(std::move(f)), kind_(kind) {
    if (static_cast<int>(f_.size()) != bins_.m()) {
      throw std::invalid_argument("Histogram: length does not match bins");
    }
    if (kind_ == HistogramKind::kConsistent) {
      double total = 0.0;
      for (double v : f_) {
        if (!(v >= 0.0)) {
          throw std::invalid_argument("Histogram: consistent entry negative");
        }
        total += v;
      }
      if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw std::invalid_argument("Histogram: consistent mass is not 1");
      }
    }
  }

  static Histogram raw(BinSpec bins, std::vector<double> f) {
    return Histogram(bins, std::move(f), HistogramKind::kRaw);
  }
  static Histogram consistent(BinSpec bins, std::vector<double> f) {
    return Histogram(bins, std::move(f), HistogramKind::kConsistent);
  }

  // Point mass on a 1-indexed bin.
  static Histogram point_mass(BinSpec bins, int bin) {
    std::vector<double> f(bins.m(), 0.0);
    f.at(bin - 1) = 1.0;
    return consistent(bins, std::move(f));
  }
  static Histogram uniform(BinSpec bins) {
    return consistent(bins, std::vector<double>(bins.m(), 1.0 / bins.m()));
  }

  const BinSpec& bins() const { return bins_; }
  int m() const { return bins_.m(); }
  HistogramKind kind() const { return kind_; }
  bool is_consistent() const { return kind_ == HistogramKind::kConsistent; }
  std::span<const double> f() const { return f_; }
  const std::vector<double>& values() const { return f_; }
  // 1-indexed access.
  double operator[](int bin) const { return f_[bin - 1]; }
  double total() const { return std::accumulate(f_.begin(), f_.end(), 0.0); }

 private:
  BinSpec bins_;
  std::vector<double> f_;
  HistogramKind kind_;
};

/// Values normalized into [0, 1].
class Dataset {
 public:
  explicit Dataset(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Dataset: empty");
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error("Dataset: value outside [0, 1]");
      }
    }
  }
  std::size_t n() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

class PrivacyBudget {
 public:
  explicit PrivacyBudget(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("PrivacyBudget: epsilon must be > 0");
    }
  }
  double epsilon() const { return epsilon_; }
  double exp_eps() const { return std::exp(epsilon_); }

 private:
  double epsilon_;
};

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

inline int bin_of(double x, const BinSpec& bins) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("bin_of: value outside [0, 1]");
  }
  const int m = bins.m();
  const int b = static_cast<int>(std::floor(x * m)) + 1;
  return std::min(b, m);
}

inline Histogram empirical_histogram(const Dataset& data, const BinSpec& bins) {
  std::vector<std::size_t> counts(bins.m(), 0);
  for (double x : data.values()) ++counts[bin_of(x, bins) - 1];
  std::vector<double> f(bins.m());
  const double n = static_cast<double>(data.n());
  for (int i = 0; i < bins.m(); ++i) f[i] = counts[i] / n;
  // Division rounding can leave the total a few ulps off; fold it into the
  // largest bin so the simplex invariant holds exactly.
  const double total = std::accumulate(f.begin(), f.end(), 0.0);
  auto it = std::max_element(f.begin(), f.end());
  *it += 1.0 - total;
  return Histogram::consistent(bins, std::move(f));
}

/// Cumulative sums P(X, v) for v = 1..m.
inline std::vector<double> cdf(std::span<const double> f) {
  std::vector<double> out(f.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) throw std::invalid_argument("cdf: non-finite");
    acc += f[i];
    out[i] = acc;
  }
  return out;
}
inline std::vector<double> cdf(const Histogram& h) { return cdf(h.f()); }

/// Affine map onto [0, 1] through the sample min/max.
inline Dataset normalize_ingested(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("normalize_ingested: need at least 2 values");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) {
    throw std::invalid_argument(
        "normalize_ingested: constant input (max == min) cannot be normalized");
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
  }
  return Dataset(std::move(out));
}

inline Dataset sample_gaussian_dataset(std::size_t n, double mu, double sigma,
                                       RngStream rng) {
  if (n == 0) throw std::invalid_argument("sample_gaussian_dataset: n == 0");
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sample_gaussian_dataset: sigma must be > 0");
  }
  std::normal_distribution<double> normal(mu, sigma);
  std::vector<double> raw(n);
  for (auto& v : raw) v = normal(rng);
  if (n == 1) return Dataset({0.5});
  return normalize_ingested(raw);
}

/// Parses one decimal value per line. Blank lines are skipped; a CSV line
/// contributes its first field, and a non-numeric first line is treated as a
/// header.
inline std::vector<double> parse_values(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::string field = line.substr(first);
    if (auto comma = field.find(','); comma != std::string::npos) {
      field.resize(comma);
    }
    while (!field.empty() &&
           (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.pop_back();
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != field.size() || !std::isfinite(v)) {
      if (out.empty() && line_no == 1) continue;  // header
      throw std::invalid_argument("parse_values: line " +
                                  std::to_string(line_no) + " is not a number");
    }
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> read_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_values(in);
}

}  // namespace ldpshift

#endif  // LDPSHIFT_CORE_HPP_
