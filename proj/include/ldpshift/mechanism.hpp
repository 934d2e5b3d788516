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

#ifndef LDPSHIFT_MECHANISM_HPP_
#define LDPSHIFT_MECHANISM_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ldpshift/core.hpp"
#include "ldpshift/oracles.hpp"
#include "ldpshift/postprocess.hpp"
#include "ldpshift/sw.hpp"

namespace ldpshift {

enum class Protocol { kGrr, kOue, kOlh, kHst, kSw };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::kGrr: return "grr";
    case Protocol::kOue: return "oue";
    case Protocol::kOlh: return "olh";
    case Protocol::kHst: return "hst";
    case Protocol::kSw: return "sw";
  }
  return "?";
}

inline Protocol parse_protocol(std::string_view s) {
  if (s == "grr") return Protocol::kGrr;
  if (s == "oue") return Protocol::kOue;
  if (s == "olh") return Protocol::kOlh;
  if (s == "hst") return Protocol::kHst;
  if (s == "sw") return Protocol::kSw;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "'");
}

inline Setting parse_setting(std::string_view s) {
  if (s == "user") return Setting::kUser;
  if (s == "server") return Setting::kServer;
  throw std::invalid_argument("unknown setting '" + std::string(s) + "'");
}

// Only OLH and HST distinguish who picks the hash or public vector.
inline bool has_setting(Protocol p) { return p == Protocol::kOlh || p == Protocol::kHst; }

/// A protocol instance: randomizer constants for one (protocol, setting, eps)
/// and the evaluation grid.
struct Mechanism {
  Protocol protocol = Protocol::kGrr;
  Setting setting = Setting::kUser;
  double epsilon = 1.0;
  int m_o = 32;
  GrrParams grr{};
  OueParams oue{};
  OlhParams olh{};
  HstParams hst{};
  SwParams sw{};

  bool server() const { return has_setting(protocol) && setting == Setting::kServer; }
  BinSpec bins() const { return BinSpec(m_o); }
};

inline Mechanism make_mechanism(Protocol protocol, Setting setting, double epsilon,
                                int m_o = 32, int m_s = 512, int g = 0) {
  Mechanism m;
  m.protocol = protocol;
  m.setting = has_setting(protocol) ? setting : Setting::kUser;
  m.epsilon = epsilon;
  m.m_o = m_o;
  m.grr = grr_params(m_o, epsilon);
  m.oue = oue_params(m_o, epsilon);
  m.olh = olh_params(m_o, epsilon, g);
  m.hst = hst_params(m_o, epsilon);
  m.sw = sw_params(epsilon, m_s);
  if (protocol == Protocol::kSw && m_s % m_o != 0) {
    throw std::invalid_argument("m_s must be a multiple of m_o");
  }
  return m;
}

using ReportSet = std::variant<GrrReports, OueReports, OlhReports, HstReports, SwReports>;

inline std::size_t report_count(const ReportSet& r) {
  return std::visit([](const auto& b) { return b.size(); }, r);
}

inline void append_reports(ReportSet& into, const ReportSet& more) {
  if (into.index() != more.index()) {
    throw std::invalid_argument("append_reports: mixed report variants");
  }
  std::visit(
      [&](auto& b) {
        using T = std::decay_t<decltype(b)>;
        b.append(std::get<T>(more));
      },
      into);
}

/// Reports of one round plus the server assignment (Server setting only).
struct Collected {
  ReportSet reports;
  std::optional<ServerAssignment> assignment;

  const ServerAssignment* assignment_ptr() const {
    return assignment ? &*assignment : nullptr;
  }
};

/// Honest reports from pre-binned inputs (CFOs) or raw values (SW). User j
/// draws from rng.substream(j); in the Server setting user j uses seed j of
/// `assignment`.
inline ReportSet perturb_bins(std::span<const int> bins, const Mechanism& m,
                              const ServerAssignment* assignment, RngStream rng) {
  switch (m.protocol) {
    case Protocol::kGrr: return grr_collect(bins, m.grr, rng);
    case Protocol::kOue: return oue_collect(bins, m.oue, rng);
    case Protocol::kOlh: return olh_collect(bins, m.olh, m.setting, assignment, rng);
    case Protocol::kHst: return hst_collect(bins, m.hst, m.setting, assignment, rng);
    case Protocol::kSw: break;
  }
  throw std::invalid_argument("perturb_bins: SW takes values, not bins");
}

inline ReportSet perturb_values(const Dataset& data, const Mechanism& m,
                                const ServerAssignment* assignment, RngStream rng) {
  if (m.protocol == Protocol::kSw) return sw_collect(data, m.sw, rng);
  const auto bins = bin_indices(data, m.bins());
  return perturb_bins(bins, m, assignment, rng);
}

/// Honest collection: bins every value and perturbs it. In the Server setting
/// an assignment of `n_total` seeds (default: data.n()) is drawn first.
inline Collected collect(const Dataset& data, const Mechanism& m, RngStream rng,
                         std::size_t n_total = 0) {
  Collected c;
  if (m.server()) {
    c.assignment = draw_assignment(n_total ? n_total : data.n(), rng.substream(0xa55));
  }
  c.reports = perturb_values(data, m, c.assignment_ptr(), rng.substream(0x7e9));
  return c;
}

/// Unbiased frequency estimate before consistency (CFOs only).
inline Histogram raw_estimate(const ReportSet& reports, const Mechanism& m,
                              const ServerAssignment* assignment) {
  switch (m.protocol) {
    case Protocol::kGrr: return grr_aggregate(std::get<GrrReports>(reports), m.grr);
    case Protocol::kOue: return oue_aggregate(std::get<OueReports>(reports), m.oue);
    case Protocol::kOlh:
      return olh_aggregate(std::get<OlhReports>(reports), m.olh, m.setting, assignment);
    case Protocol::kHst:
      return hst_aggregate(std::get<HstReports>(reports), m.hst, m.setting, assignment);
    case Protocol::kSw: break;
  }
  throw std::invalid_argument("raw_estimate: SW has no raw frequency estimate");
}

/// Consistent estimate on the protocol's native grid: Norm-Sub over m_o bins
/// for CFOs, EMS over m_s bins for SW.
inline Histogram native_estimate(const ReportSet& reports, const Mechanism& m,
                                 const ServerAssignment* assignment,
                                 const EmsOptions& ems = {}) {
  if (m.protocol == Protocol::kSw) {
    return ems_reconstruct_detailed(std::get<SwReports>(reports), m.sw, ems).estimate;
  }
  return norm_sub(raw_estimate(reports, m, assignment));
}

/// Consistent estimate on the m_o evaluation grid (SW is coarsened).
inline Histogram estimate(const ReportSet& reports, const Mechanism& m,
                          const ServerAssignment* assignment, const EmsOptions& ems = {}) {
  auto h = native_estimate(reports, m, assignment, ems);
  if (m.protocol == Protocol::kSw) return coarsen(h, m.bins());
  return h;
}

}  // namespace ldpshift

#endif  // LDPSHIFT_MECHANISM_HPP_
