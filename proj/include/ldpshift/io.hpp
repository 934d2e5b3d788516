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

#ifndef LDPSHIFT_IO_HPP_
#define LDPSHIFT_IO_HPP_

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldpshift/attacks.hpp"
#include "ldpshift/detect.hpp"
#include "ldpshift/mechanism.hpp"
#include "ldpshift/oracles.hpp"

namespace ldpshift {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Reports. One JSON object per report, tagged by "type".

inline json to_json(const Report& r) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GrrReport>) {
          return {{"type", "grr"}, {"index", x.index}};
        } else if constexpr (std::is_same_v<T, OueReport>) {
          std::string bits(x.bits.size(), '0');
          for (std::size_t i = 0; i < x.bits.size(); ++i) bits[i] = x.bits[i] ? '1' : '0';
          return {{"type", "oue"}, {"bits", bits}};
        } else if constexpr (std::is_same_v<T, OlhReport>) {
          return {{"type", "olh"}, {"seed", x.seed}, {"value", x.value}};
        } else if constexpr (std::is_same_v<T, HstReport>) {
          json j{{"type", "hst"}, {"seed", x.seed}, {"value", x.value}};
          if (!x.vector.empty()) {
            std::vector<int> v(x.vector.begin(), x.vector.end());
            j["vector"] = v;
          }
          return j;
        } else {
          return {{"type", "sw"}, {"value", x.value}};
        }
      },
      r);
}

inline Report report_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "grr") return GrrReport{j.at("index").get<int>()};
  if (type == "oue") {
    OueReport r;
    for (char c : j.at("bits").get<std::string>()) {
      if (c != '0' && c != '1') throw std::invalid_argument("oue report: bits must be 0/1");
      r.bits.push_back(static_cast<std::uint8_t>(c == '1'));
    }
    return r;
  }
  if (type == "olh") return OlhReport{j.at("seed").get<std::uint64_t>(), j.at("value").get<int>()};
  if (type == "hst") {
    HstReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.value = j.at("value").get<double>();
    if (j.contains("vector")) {
      for (int v : j.at("vector").get<std::vector<int>>()) {
        if (v != 1 && v != -1) throw std::invalid_argument("hst report: vector entries must be +-1");
        r.vector.push_back(static_cast<std::int8_t>(v));
      }
    }
    return r;
  }
  if (type == "sw") return SwReport{j.at("value").get<double>()};
  throw std::invalid_argument("unknown report type '" + type + "'");
}

inline std::vector<Report> unpack(const ReportSet& set, const Mechanism& m) {
  std::vector<Report> out;
  out.reserve(report_count(set));
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        for (std::size_t j = 0; j < b.size(); ++j) {
          if constexpr (std::is_same_v<T, HstReports>) {
            out.push_back(report_at(b, j, m.hst.c));
          } else {
            out.push_back(report_at(b, j));
          }
        }
      },
      set);
  return out;
}

inline ReportSet pack(std::span<const Report> reports, const Mechanism& m) {
  switch (m.protocol) {
    case Protocol::kGrr: return to_grr_batch(reports);
    case Protocol::kOue: return to_oue_batch(reports, m.m_o);
    case Protocol::kOlh: return to_olh_batch(reports);
    case Protocol::kHst: return to_hst_batch(reports, m.hst);
    case Protocol::kSw: {
      SwReports out;
      for (const auto& r : reports) out.value.push_back(expect_variant<SwReport>(r, "sw").value);
      return out;
    }
  }
  throw std::invalid_argument("pack: unknown protocol");
}

/// JSON-lines transcript, one report per line, in user order.
inline void write_transcript(std::ostream& os, const ReportSet& set, const Mechanism& m) {
  for (const auto& r : unpack(set, m)) os << to_json(r).dump() << '\n';
}

inline ReportSet read_transcript(std::istream& is, const Mechanism& m) {
  std::vector<Report> reports;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    reports.push_back(report_from_json(json::parse(line)));
  }
  return pack(reports, m);
}

// ---------------------------------------------------------------------------
// Results.

inline json to_json(const Histogram& h) {
  return {{"m", h.m()},
          {"kind", h.is_consistent() ? "consistent" : "raw"},
          {"f", h.values()}};
}

inline json to_json(const DetectionVerdict& v) {
  return {{"p_value", v.p_value},
          {"ks_stat", v.ks_stat},
          {"polluted", v.polluted},
          {"g_ben", v.g_ben},
          {"g_det", v.g_det}};
}

inline DetectionVerdict verdict_from_json(const json& j) {
  DetectionVerdict v;
  v.p_value = j.at("p_value").get<double>();
  v.ks_stat = j.at("ks_stat").get<double>();
  v.polluted = j.at("polluted").get<bool>();
  v.g_ben = j.at("g_ben").get<std::vector<double>>();
  v.g_det = j.at("g_det").get<std::vector<double>>();
  return v;
}

inline json optional_json(const std::optional<double>& x) {
  return x ? json(*x) : json(nullptr);
}

inline json to_json(const TrialRecord& r) {
  return {{"trial", r.trial},     {"seed", r.seed}, {"attack", r.attack},
          {"epsilon", r.epsilon}, {"beta", r.beta}, {"n", r.n},
          {"n_f", r.n_f},         {"asg", r.asg},   {"sgr", optional_json(r.sgr)},
          {"w1", r.w1},           {"raw_asg", optional_json(r.raw_asg)},
          {"truth", r.truth},     {"estimate", r.estimate}};
}

}  // namespace ldpshift

#endif  // LDPSHIFT_IO_HPP_
