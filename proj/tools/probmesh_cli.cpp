// Copyright 2026 The probmesh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "probmesh/config.hpp"
#include "probmesh/errors.hpp"
#include "probmesh/experiments.hpp"
#include "probmesh/selftest.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

probmesh::ExperimentConfig load(const std::string& path, long long seed) {
  probmesh::ExperimentConfig cfg = path.empty() ? probmesh::ExperimentConfig{} : probmesh::ExperimentConfig::load(path);
  if (seed >= 0) cfg.set("seed", std::to_string(seed));
  return cfg;
}

std::string out_dir(const probmesh::ExperimentConfig& cfg, const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  return cfg.get_string("out", fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic meshless solver: forward, inverse, design and Allen-Cahn experiments"};
  app.require_subcommand(1);
  std::string config;
  std::string out;
  long long seed = -1;
  app.add_option("--config", config, "Path to a key = value experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", seed, "Seed (overrides the config)")->check(CLI::NonNegativeNumber);

  auto* forward = app.add_subcommand("forward", "Forward solve: solution.csv, samples.csv, convergence.csv");
  auto* inverse = app.add_subcommand("inverse", "Posterior over theta: credible_intervals.csv and posterior grids");
  auto* design = app.add_subcommand("design", "Coordinate-exchange design: design CSVs and loss_trace.csv");
  auto* allen = app.add_subcommand("allen-cahn", "Allen-Cahn pseudo-marginal study");
  auto* selftest = app.add_subcommand("selftest", "Oracle and property suites");
  for (auto* sub : {forward, inverse, design, allen, selftest}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (selftest->parsed()) {
      bool ok = true;
      probmesh::run_selftest([&](const probmesh::SelfCheck& c) {
        std::printf("%s %s (%s) %.2fs\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str(), c.seconds);
        std::fflush(stdout);
        ok = ok && c.passed;
      });
      return ok ? 0 : kNumericalError;
    }
    const probmesh::ExperimentConfig cfg = load(config, seed);
    if (forward->parsed()) {
      const std::string dir = out_dir(cfg, out, "out/forward");
      const auto rows = probmesh::cmd_forward(cfg, dir);
      for (const auto& r : rows) std::printf("m=%d l2_error=%.6e sigma2_l1=%.6e\n", r.m, r.l2_error, r.sigma2_l1);
      std::printf("wrote %s\n", dir.c_str());
    } else if (inverse->parsed()) {
      const std::string dir = out_dir(cfg, out, "out/inverse");
      for (const auto& r : probmesh::cmd_inverse(cfg, dir))
        std::printf("m=%d %-6s mean=%.5f sd=%.5f\n", r.m, r.method.c_str(), r.mean, r.sd);
      std::printf("wrote %s\n", dir.c_str());
    } else if (design->parsed()) {
      const std::string dir = out_dir(cfg, out, "out/design");
      const auto r = probmesh::cmd_design(cfg, dir);
      std::printf("initial_loss=%.6e final_loss=%.6e\n", r.initial_loss(), r.final_loss());
      std::printf("wrote %s\n", dir.c_str());
    } else if (allen->parsed()) {
      const std::string dir = out_dir(cfg, out, "out/allen_cahn");
      const auto r = probmesh::cmd_allen_cahn(cfg, dir);
      std::printf("lengthscale=%.4f\n", r.lengthscale);
      for (const auto& row : r.rows)
        std::printf("m=%d %-6s mean=%.4f sd=%.4f mode=%.4f acceptance=%.3f indices=%d\n", row.m, row.method.c_str(),
                    row.mean, row.sd, row.mode, row.acceptance, row.distinct_indices);
      std::printf("wrote %s\n", dir.c_str());
    }
  } catch (const probmesh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const probmesh::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const probmesh::UnsupportedOperator& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const probmesh::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return 0;
}
