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

// ldpshift: attack, detection and theory experiments on LDP range protocols.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ldpshift/ldpshift.hpp"

namespace {

using ldpshift::json;

struct Flags {
  std::string config;
  std::vector<std::string> protocols, settings, sw_ranges;
  std::vector<double> eps, beta;
  std::vector<int> g_list;
  std::string attack, dataset, out, input;
  int trials = 0, bins = 0, sw_bins = 0, g = 0, detect_m = 0, threads = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double mu = 0.0, sigma = 0.0, alpha = 0.0;
  bool mud = false;
};

void add_shared(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override it");
  app->add_option("--protocol", f.protocols, "grr, oue, olh, hst, sw")->delimiter(',');
  app->add_option("--setting", f.settings, "user, server or both")->delimiter(',');
  app->add_option("--attack", f.attack, "crafted, baseline or pad");
  app->add_option("--sw-range", f.sw_ranges,
                  "rightmost-bin, high-third, above-one, full-high")
      ->delimiter(',');
  app->add_option("--eps", f.eps, "privacy budgets")->delimiter(',');
  app->add_option("--beta", f.beta, "fake-user fractions")->delimiter(',');
  app->add_option("--trials", f.trials, "trials per cell");
  app->add_option("--bins", f.bins, "evaluation bins m_o");
  app->add_option("--sw-bins", f.sw_bins, "SW aggregation bins m_s");
  app->add_option("--g", f.g, "OLH hash range (0: default)");
  app->add_option("--g-list", f.g_list, "hash ranges for theory")->delimiter(',');
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--dataset", f.dataset, "gaussian, uniform or a values file");
  app->add_option("--n", f.n, "synthetic dataset size");
  app->add_option("--mu", f.mu, "Gaussian mean");
  app->add_option("--sigma", f.sigma, "Gaussian standard deviation");
  app->add_option("--alpha", f.alpha, "KS significance level");
  app->add_option("--detect-m", f.detect_m, "detection rounds");
  app->add_flag("--mud", f.mud, "also run the MUD baseline");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_option("--out", f.out, "output file (default stdout)");
}

ldpshift::ExperimentConfig build_config(CLI::App* app, const Flags& f) {
  ldpshift::ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot open config " + f.config);
    cfg = ldpshift::config_from_json(json::parse(in), cfg);
  }
  json o = json::object();
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (given("--protocol")) o["protocols"] = f.protocols;
  if (given("--setting")) o["settings"] = f.settings;
  if (given("--attack")) o["attack"] = f.attack;
  if (given("--sw-range")) o["sw_ranges"] = f.sw_ranges;
  if (given("--eps")) o["epsilons"] = f.eps;
  if (given("--beta")) o["betas"] = f.beta;
  if (given("--trials")) o["trials"] = f.trials;
  if (given("--bins")) o["bins"] = f.bins;
  if (given("--sw-bins")) o["sw_bins"] = f.sw_bins;
  if (given("--g")) o["g"] = f.g;
  if (given("--g-list")) o["g_list"] = f.g_list;
  if (given("--seed")) o["seed"] = f.seed;
  if (given("--alpha")) o["alpha"] = f.alpha;
  if (given("--detect-m")) o["detect_m"] = f.detect_m;
  if (given("--mud")) o["mud"] = f.mud;
  if (given("--threads")) o["threads"] = f.threads;
  json ds = json::object();
  if (given("--dataset")) ds["kind"] = f.dataset;
  if (given("--n")) ds["n"] = f.n;
  if (given("--mu")) ds["mu"] = f.mu;
  if (given("--sigma")) ds["sigma"] = f.sigma;
  if (!ds.empty()) o["dataset"] = ds;
  cfg = ldpshift::config_from_json(o, cfg);
  cfg.validate();
  return cfg;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  fn(os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ldpshift: distribution-shift attacks on LDP range queries"};
  app.require_subcommand(1);
  Flags f;
  auto* attack = app.add_subcommand("attack", "Monte-Carlo attack sweep");
  auto* detect = app.add_subcommand("detect", "zero-shot detection sweep");
  auto* theory = app.add_subcommand("theory", "analytic vs Monte-Carlo ASG");
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  auto* ingest = app.add_subcommand("ingest", "normalize a values file to [0, 1]");
  for (auto* s : {attack, detect, theory, synth, ingest}) add_shared(s, f);
  ingest->add_option("--input", f.input, "values file (one per line or CSV)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* sub : app.get_subcommands()) {
      if (sub == ingest) {
        with_output(f.out, [&](std::ostream& os) {
          ldpshift::cmd_ingest(f.input, {os, std::cerr});
        });
        continue;
      }
      const auto cfg = build_config(sub, f);
      with_output(f.out, [&](std::ostream& os) {
        const ldpshift::RunContext ctx{os, std::cerr};
        if (sub == attack) ldpshift::cmd_attack(cfg, ctx);
        if (sub == detect) ldpshift::cmd_detect(cfg, ctx);
        if (sub == theory) ldpshift::cmd_theory(cfg, ctx);
        if (sub == synth) ldpshift::cmd_synth(cfg, ctx);
      });
    }
  } catch (const std::exception& e) {
    std::cerr << "ldpshift: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
