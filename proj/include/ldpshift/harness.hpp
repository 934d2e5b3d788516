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

#ifndef LDPSHIFT_HARNESS_HPP_
#define LDPSHIFT_HARNESS_HPP_

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "ldpshift/attacks.hpp"
#include "ldpshift/core.hpp"
#include "ldpshift/detect.hpp"
#include "ldpshift/io.hpp"
#include "ldpshift/mechanism.hpp"
#include "ldpshift/metrics.hpp"
#include "ldpshift/theory.hpp"

namespace ldpshift {

inline Strategy parse_strategy(std::string_view s) {
  if (s == "crafted") return Strategy::kCrafted;
  if (s == "baseline") return Strategy::kBaseline;
  if (s == "pad") return Strategy::kPadded;
  throw std::invalid_argument("unknown attack strategy '" + std::string(s) + "'");
}

/// "gaussian" and "uniform" are synthetic; anything else is a file of values
/// already in [0, 1] (see cmd_ingest).
struct DatasetSource {
  std::string kind = "gaussian";
  std::size_t n = 100000;
  double mu = 0.0;
  double sigma = 10.0;
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<Protocol> protocols{Protocol::kOlh};
  std::vector<Setting> settings{Setting::kUser};
  Strategy strategy = Strategy::kCrafted;
  std::vector<SwRange> sw_ranges{SwRange::kFullHigh};
  std::vector<double> epsilons{1.0};
  std::vector<double> betas{0.05};
  int trials = 10;
  int m_o = 32;
  int m_s = 512;
  int g = 0;  // OLH hash range; 0 selects floor(e^eps + 1)
  std::vector<int> g_list{2, 4, 8};
  std::uint64_t seed = 1;
  int detect_m = 10;
  double alpha = 0.002;
  bool mud = false;
  int threads = 1;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (protocols.empty()) throw std::invalid_argument("config: protocol list is empty");
    if (settings.empty()) throw std::invalid_argument("config: setting list is empty");
    if (epsilons.empty()) throw std::invalid_argument("config: epsilon list is empty");
    if (betas.empty()) throw std::invalid_argument("config: beta list is empty");
    if (sw_ranges.empty()) throw std::invalid_argument("config: sw range list is empty");
    for (double e : epsilons) PrivacyBudget{e};
    for (double b : betas) {
      if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("config: beta outside [0, 1)");
    }
    static_cast<void>(BinSpec(m_o));
    if (m_s < m_o || m_s % m_o != 0) {
      throw std::invalid_argument("config: sw bins must be a positive multiple of bins");
    }
    if (g != 0 && g < 2) throw std::invalid_argument("config: g must be 0 or >= 2");
    for (int x : g_list) {
      if (x < 2) throw std::invalid_argument("config: g list entries must be >= 2");
    }
    if (detect_m < 2) throw std::invalid_argument("config: detect-m must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha outside (0, 1)");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (dataset.n == 0) throw std::invalid_argument("config: dataset size must be >= 1");
    if (strategy == Strategy::kPadded) {
      for (auto p : protocols) {
        if (p != Protocol::kOue) {
          throw std::invalid_argument(std::string("config: attack 'pad' is not defined for ") +
                                      to_string(p));
        }
      }
    }
  }
};

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = {{"kind", c.dataset.kind},
                  {"n", c.dataset.n},
                  {"mu", c.dataset.mu},
                  {"sigma", c.dataset.sigma}};
  std::vector<std::string> ps, ss, rs;
  for (auto p : c.protocols) ps.push_back(to_string(p));
  for (auto s : c.settings) ss.push_back(to_string(s));
  for (auto r : c.sw_ranges) rs.push_back(to_string(r));
  j["protocols"] = ps;
  j["settings"] = ss;
  j["attack"] = to_string(c.strategy);
  j["sw_ranges"] = rs;
  j["epsilons"] = c.epsilons;
  j["betas"] = c.betas;
  j["trials"] = c.trials;
  j["bins"] = c.m_o;
  j["sw_bins"] = c.m_s;
  j["g"] = c.g;
  j["g_list"] = c.g_list;
  j["seed"] = c.seed;
  j["detect_m"] = c.detect_m;
  j["alpha"] = c.alpha;
  j["mud"] = c.mud;
  return j;
}

namespace detail {

template <class T>
std::vector<T> scalar_or_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

}  // namespace detail

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {}) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset") {
      if (value.is_string()) {
        base.dataset.kind = value.get<std::string>();
        continue;
      }
      if (value.contains("kind")) base.dataset.kind = value.at("kind").get<std::string>();
      if (value.contains("n")) base.dataset.n = value.at("n").get<std::size_t>();
      if (value.contains("mu")) base.dataset.mu = value.at("mu").get<double>();
      if (value.contains("sigma")) base.dataset.sigma = value.at("sigma").get<double>();
    } else if (key == "protocols" || key == "protocol") {
      base.protocols.clear();
      for (const auto& s : detail::scalar_or_list<std::string>(value)) {
        base.protocols.push_back(parse_protocol(s));
      }
    } else if (key == "settings" || key == "setting") {
      base.settings.clear();
      for (const auto& s : detail::scalar_or_list<std::string>(value)) {
        if (s == "both") {
          base.settings.push_back(Setting::kUser);
          base.settings.push_back(Setting::kServer);
        } else {
          base.settings.push_back(parse_setting(s));
        }
      }
    } else if (key == "attack") {
      base.strategy = parse_strategy(value.get<std::string>());
    } else if (key == "sw_ranges" || key == "sw_range") {
      base.sw_ranges.clear();
      for (const auto& s : detail::scalar_or_list<std::string>(value)) {
        base.sw_ranges.push_back(parse_sw_range(s));
      }
    } else if (key == "epsilons" || key == "eps") {
      base.epsilons = detail::scalar_or_list<double>(value);
    } else if (key == "betas" || key == "beta") {
      base.betas = detail::scalar_or_list<double>(value);
    } else if (key == "trials") {
      base.trials = value.get<int>();
    } else if (key == "bins") {
      base.m_o = value.get<int>();
    } else if (key == "sw_bins") {
      base.m_s = value.get<int>();
    } else if (key == "g") {
      base.g = value.get<int>();
    } else if (key == "g_list") {
      base.g_list = detail::scalar_or_list<int>(value);
    } else if (key == "seed") {
      base.seed = value.get<std::uint64_t>();
    } else if (key == "detect_m") {
      base.detect_m = value.get<int>();
    } else if (key == "alpha") {
      base.alpha = value.get<double>();
    } else if (key == "mud") {
      base.mud = value.get<bool>();
    } else if (key == "threads") {
      base.threads = value.get<int>();
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return base;
}

/// Hash of the canonical config; the thread count does not enter it.
inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

inline Dataset load_dataset(const ExperimentConfig& c) {
  const RngStream rng = RngStream(c.seed).substream(stream_tag::kData);
  if (c.dataset.kind == "gaussian") {
    return sample_gaussian_dataset(c.dataset.n, c.dataset.mu, c.dataset.sigma, rng);
  }
  if (c.dataset.kind == "uniform") {
    RngStream r = rng;
    std::vector<double> v(c.dataset.n);
    for (auto& x : v) x = r.uniform();
    return Dataset(std::move(v));
  }
  return Dataset(read_values_file(c.dataset.kind));
}

/// One cell of the sweep cross product.
struct Cell {
  Mechanism mech;
  AttackSpec spec;
  std::string label;
  std::uint64_t key = 0;

  json describe() const {
    json j{{"cell", label},
           {"protocol", to_string(mech.protocol)},
           {"attack", to_string(spec.strategy)},
           {"epsilon", mech.epsilon},
           {"beta", spec.beta}};
    if (has_setting(mech.protocol)) j["setting"] = to_string(mech.setting);
    if (mech.protocol == Protocol::kSw && spec.strategy == Strategy::kCrafted) {
      j["sw_range"] = to_string(spec.sw_range);
    }
    if (mech.protocol == Protocol::kOlh) j["g"] = mech.olh.g;
    return j;
  }
};

inline Cell make_cell(const ExperimentConfig& c, Protocol p, Setting s, SwRange r, double eps,
                      double beta, int g) {
  Cell cell;
  cell.mech = make_mechanism(p, s, eps, c.m_o, c.m_s, g);
  cell.spec = AttackSpec{p, cell.mech.setting, c.strategy, beta, r};
  cell.spec.validate();
  cell.label = cell.spec.label();
  char buf[96];
  std::snprintf(buf, sizeof buf, "|%.17g|%.17g|%d", eps, beta, cell.mech.olh.g);
  cell.key = fnv1a(cell.label + buf);
  return cell;
}

inline std::vector<Cell> enumerate_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  for (auto p : c.protocols) {
    std::vector<Setting> settings = has_setting(p) ? c.settings : std::vector{Setting::kUser};
    std::vector<SwRange> ranges = (p == Protocol::kSw && c.strategy == Strategy::kCrafted)
                                      ? c.sw_ranges
                                      : std::vector{SwRange::kFullHigh};
    for (auto s : settings) {
      for (auto r : ranges) {
        for (double e : c.epsilons) {
          for (double b : c.betas) cells.push_back(make_cell(c, p, s, r, e, b, c.g));
        }
      }
    }
  }
  return cells;
}

inline std::uint64_t trial_seed(const ExperimentConfig& c, const Cell& cell, std::uint64_t t) {
  return derive_seed(c.seed, {cell.key, t});
}

/// Runs fn(0..count-1) on `threads` workers. The first exception is rethrown.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  for (std::size_t i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error (sample variance over count) in input order.
inline MeanStderr mean_stderr(std::span<const double> x) {
  MeanStderr r;
  r.count = x.size();
  if (x.empty()) return r;
  double sum = 0.0;
  for (double v : x) sum += v;
  r.mean = sum / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.stderr_ = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return r;
}

inline json to_json(const MeanStderr& s) {
  return {{"mean", s.mean}, {"stderr", s.stderr_}, {"count", s.count}};
}

struct RunContext {
  std::ostream& out;
  std::ostream& log;
};

namespace detail {

inline json record_header(const std::string& hash, const Cell& cell, std::uint64_t trial,
                          std::uint64_t seed) {
  json j = cell.describe();
  j["kind"] = "record";
  j["config_hash"] = hash;
  j["trial"] = trial;
  j["seed"] = seed;
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// attack

/// Full sweep of attacked trials; one record per trial, then a summary line.
inline json cmd_attack(const ExperimentConfig& c, RunContext ctx) {
  c.validate();
  const Dataset data = load_dataset(c);
  const std::string hash = config_hash(c);
  const auto cells = enumerate_cells(c);
  json summary{{"kind", "summary"}, {"command", "attack"}, {"config_hash", hash},
               {"config", to_json(c)}, {"cells", json::array()}};
  for (const auto& cell : cells) {
    ctx.log << "attack " << cell.label << " eps=" << cell.mech.epsilon
            << " beta=" << cell.spec.beta << " trials=" << c.trials << "\n";
    std::vector<TrialRecord> recs(static_cast<std::size_t>(c.trials));
    parallel_for(recs.size(), c.threads, [&](std::size_t t) {
      const std::uint64_t seed = trial_seed(c, cell, t);
      recs[t] = run_attacked_trial(data, cell.mech, cell.spec, RngStream(seed), t);
    });
    std::vector<double> asgs, sgrs;
    for (const auto& r : recs) {
      json j = detail::record_header(hash, cell, r.trial, r.seed);
      j["label"] = "attacked";
      j["n"] = r.n;
      j["n_f"] = r.n_f;
      j["asg"] = r.asg;
      j["sgr"] = optional_json(r.sgr);
      j["w1"] = r.w1;
      j["raw_asg"] = optional_json(r.raw_asg);
      j["estimate"] = r.estimate;
      ctx.out << j.dump() << '\n';
      asgs.push_back(r.asg);
      if (r.sgr) sgrs.push_back(*r.sgr);
    }
    json row = cell.describe();
    row["trials"] = c.trials;
    row["asg"] = to_json(mean_stderr(asgs));
    row["sgr"] = to_json(mean_stderr(sgrs));
    summary["cells"].push_back(row);
  }
  ctx.out << summary.dump() << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// detect

struct DetectTrial {
  std::uint64_t seed = 0;
  bool attacked = false;
  DetectionVerdict verdict;
  std::optional<bool> mud_alarm;
};

inline bool mud_supported(Protocol p) {
  return p == Protocol::kOue || p == Protocol::kOlh || p == Protocol::kHst;
}

/// One detection trial. Attacked trials replace the last beta*n users by
/// fakes; clean trials perturb the whole dataset honestly.
inline DetectTrial run_detect_trial(const Dataset& data, const Cell& cell, bool attacked,
                                    RngStream rng, const DetectOptions& opt, bool mud) {
  DetectTrial out;
  out.seed = rng.seed();
  out.attacked = attacked;
  Collected col;
  if (attacked) {
    col = attacked_collection(data, cell.mech, cell.spec, rng).collected;
  } else {
    col = collect(data, cell.mech, rng.substream(stream_tag::kHonest));
  }
  out.verdict = zero_shot_detect(col.reports, cell.mech, col.assignment_ptr(),
                                 rng.substream(stream_tag::kDetect), opt);
  if (mud && mud_supported(cell.mech.protocol)) {
    out.mud_alarm = mud_detect(col.reports, cell.mech, col.assignment_ptr());
  }
  return out;
}

/// The first half of the trials are attacked, the second half clean. AUC is
/// computed on the score 1 - p_value.
inline json cmd_detect(const ExperimentConfig& c, RunContext ctx) {
  c.validate();
  if (c.trials % 2 != 0) throw std::invalid_argument("detect: trials must be even");
  const Dataset data = load_dataset(c);
  const std::string hash = config_hash(c);
  const auto cells = enumerate_cells(c);
  DetectOptions opt;
  opt.rounds = c.detect_m;
  opt.alpha = c.alpha;
  json summary{{"kind", "summary"}, {"command", "detect"}, {"config_hash", hash},
               {"config", to_json(c)}, {"cells", json::array()}};
  const std::size_t half = static_cast<std::size_t>(c.trials) / 2;
  for (const auto& cell : cells) {
    ctx.log << "detect " << cell.label << " eps=" << cell.mech.epsilon
            << " beta=" << cell.spec.beta << " trials=" << c.trials << "\n";
    std::vector<DetectTrial> trials(static_cast<std::size_t>(c.trials));
    parallel_for(trials.size(), c.threads, [&](std::size_t t) {
      trials[t] = run_detect_trial(data, cell, t < half, RngStream(trial_seed(c, cell, t)), opt,
                                   c.mud);
    });
    std::vector<double> scores, mud_scores;
    std::vector<bool> positive;
    std::size_t tp = 0, fp = 0;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const auto& tr = trials[t];
      json j = detail::record_header(hash, cell, t, tr.seed);
      j["label"] = tr.attacked ? "attacked" : "clean";
      j["detection"] = to_json(tr.verdict);
      if (tr.mud_alarm) j["mud_alarm"] = *tr.mud_alarm;
      ctx.out << j.dump() << '\n';
      scores.push_back(1.0 - tr.verdict.p_value);
      positive.push_back(tr.attacked);
      if (tr.mud_alarm) mud_scores.push_back(*tr.mud_alarm ? 1.0 : 0.0);
      if (tr.verdict.polluted) (tr.attacked ? tp : fp) += 1;
    }
    json row = cell.describe();
    row["trials"] = c.trials;
    row["auc"] = roc_auc(scores, positive);
    row["detection_rate"] = static_cast<double>(tp) / static_cast<double>(half);
    row["false_positive_rate"] = static_cast<double>(fp) / static_cast<double>(half);
    if (!mud_scores.empty()) row["mud_auc"] = roc_auc(mud_scores, positive);
    summary["cells"].push_back(row);
  }
  ctx.out << summary.dump() << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// theory

/// Analytic vs Monte-Carlo expected ASG of the raw estimate for OLH (each g in
/// g_list) and HST (g = 2).
inline json cmd_theory(const ExperimentConfig& c, RunContext ctx) {
  c.validate();
  const Dataset data = load_dataset(c);
  const std::string hash = config_hash(c);
  json summary{{"kind", "summary"}, {"command", "theory"}, {"config_hash", hash},
               {"config", to_json(c)}, {"rows", json::array()}};
  for (auto p : c.protocols) {
    if (p != Protocol::kOlh && p != Protocol::kHst) {
      throw std::invalid_argument(std::string("theory: protocol must be olh or hst, got ") +
                                  to_string(p));
    }
    const std::vector<int> gs = p == Protocol::kHst ? std::vector{2} : c.g_list;
    for (auto s : c.settings) {
      for (double eps : c.epsilons) {
        for (double beta : c.betas) {
          for (int g : gs) {
            ExperimentConfig cc = c;
            cc.strategy = Strategy::kCrafted;
            const Cell cell = make_cell(cc, p, s, SwRange::kFullHigh, eps, beta, g);
            ctx.log << "theory " << cell.label << " eps=" << eps << " beta=" << beta
                    << " g=" << g << "\n";
            std::vector<TrialRecord> recs(static_cast<std::size_t>(c.trials));
            parallel_for(recs.size(), c.threads, [&](std::size_t t) {
              recs[t] = run_attacked_trial(data, cell.mech, cell.spec,
                                           RngStream(trial_seed(c, cell, t)), t);
            });
            std::vector<double> mc;
            for (const auto& r : recs) {
              json j = detail::record_header(hash, cell, r.trial, r.seed);
              j["label"] = "attacked";
              j["raw_asg"] = *r.raw_asg;
              ctx.out << j.dump() << '\n';
              mc.push_back(*r.raw_asg);
            }
            const TheoryInput in{recs.front().truth, beta, eps, g, cell.mech.setting};
            const double analytic = p == Protocol::kHst ? expected_asg_hst(in) : expected_asg(in);
            const auto stats = mean_stderr(mc);
            json row = cell.describe();
            row["g"] = g;
            row["trials"] = c.trials;
            row["analytic"] = analytic;
            row["analytic_estimator"] =
                p == Protocol::kHst ? expected_asg_hst(in, TheoryForm::kEstimator)
                                    : expected_asg(in, TheoryForm::kEstimator);
            row["analytic_short"] =
                g > 2 ? json(expected_asg(in, TheoryForm::kShort)) : json(nullptr);
            row["monte_carlo"] = to_json(stats);
            row["ratio"] = analytic != 0.0 ? json(stats.mean / analytic) : json(nullptr);
            row["z"] = stats.stderr_ > 0.0 ? json((stats.mean - analytic) / stats.stderr_)
                                          : json(nullptr);
            summary["rows"].push_back(row);
          }
        }
      }
    }
  }
  ctx.out << summary.dump() << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// synth / ingest

inline void write_values(std::ostream& os, std::span<const double> values) {
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    os << buf;
  }
}

inline Dataset cmd_synth(const ExperimentConfig& c, RunContext ctx) {
  ExperimentConfig cc = c;
  if (cc.dataset.kind != "gaussian" && cc.dataset.kind != "uniform") cc.dataset.kind = "gaussian";
  const Dataset d = load_dataset(cc);
  ctx.log << "synth " << cc.dataset.kind << " n=" << d.n() << "\n";
  write_values(ctx.out, d.values());
  return d;
}

inline Dataset cmd_ingest(const std::string& input, RunContext ctx) {
  const auto raw = read_values_file(input);
  const Dataset d = normalize_ingested(raw);
  ctx.log << "ingest " << input << " n=" << d.n() << "\n";
  write_values(ctx.out, d.values());
  return d;
}

}  // namespace ldpshift

#endif  // LDPSHIFT_HARNESS_HPP_
