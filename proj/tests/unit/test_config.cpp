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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "probmesh/config.hpp"
#include "probmesh/errors.hpp"
#include "probmesh/experiments.hpp"

namespace probmesh {
namespace {

namespace fs = std::filesystem;

const char* kSample = R"(# forward study
problem = poisson_1d
seed = 7
kernel.family = natural_poisson_1d
kernel.scale = 2.5
design.m = 39
design.m_list = 10, 20, 40
obs.locations = 0.25; 0.75
inference.iters = 500   # trailing comment
)";

TEST(Config, ParseGetters) {
  const ExperimentConfig c = ExperimentConfig::parse(kSample);
  EXPECT_EQ(c.get_string("problem", ""), "poisson_1d");
  EXPECT_EQ(c.get_int("seed", 0), 7);
  EXPECT_DOUBLE_EQ(c.get_double("kernel.scale", 0.0), 2.5);
  EXPECT_EQ(c.get_list("design.m_list", {}), (std::vector<double>{10, 20, 40}));
  EXPECT_EQ(c.get_int("inference.iters", 0), 500);
  const auto pts = c.get_points("obs.locations");
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts[1].first, 0.75);
  EXPECT_DOUBLE_EQ(c.get_double("obs.gamma", 0.001), 0.001);
  EXPECT_FALSE(c.has("obs.gamma"));
  EXPECT_THROW(c.require_string("out"), ConfigError);
}

TEST(Config, RoundTripIsIdentity) {
  const ExperimentConfig a = ExperimentConfig::parse(kSample);
  const ExperimentConfig b = ExperimentConfig::parse(a.serialise());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.serialise(), b.serialise());
}

TEST(Config, DiagnosticsCarryLineNumbers) {
  try {
    ExperimentConfig::parse("problem = poisson_1d\nkernel.colour = red\n", "study.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("study.cfg:2"), std::string::npos) << e.what();
  }
  try {
    ExperimentConfig::parse("seed = 1\n\nkernel.scale = wide\n", "s.cfg").get_double("kernel.scale", 1.0);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("s.cfg:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ExperimentConfig::parse("seed 1\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("seed = 1.5\n").get_int("seed", 0), ConfigError);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/x.cfg"), ConfigError);
}

TEST(Config, KnownKeysCoverSections) {
  const auto& keys = ExperimentConfig::known_keys();
  for (const char* k : {"problem", "kernel.family", "design.source", "obs.gamma", "inference.method", "inference.lengthscale"})
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
}

TEST(Experiments, KernelAndPriorFromConfig) {
  const ExperimentConfig c = ExperimentConfig::parse("kernel.family = integral\nkernel.base = wendland_c2\nkernel.scale = 2.5\n");
  EXPECT_EQ(kernel_from_config(c, Domain::unit_interval()).family(), KernelFamily::IntegralType);
  EXPECT_EQ(prior_from_string("uniform 0.02 0.15").kind(), ParameterModel::Kind::Uniform);
  EXPECT_EQ(prior_from_string("log_gaussian 0 1").kind(), ParameterModel::Kind::LogGaussian);
  EXPECT_EQ(prior_from_string("field 6 0.3 exp").dimension(), 6);
  EXPECT_THROW(prior_from_string("beta 1 1"), ConfigError);
  EXPECT_THROW(kernel_from_config(ExperimentConfig::parse("kernel.family = matern\n"), Domain::unit_interval()), ConfigError);
}

TEST(Experiments, UniformInteriorLayouts) {
  const auto a = uniform_interior(Domain::unit_interval(), 4);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_DOUBLE_EQ(a[0].x, 0.2);
  const auto b = uniform_interior(Domain::unit_square(), 20);
  EXPECT_EQ(b.size(), 20u);
  for (const Point& p : b) EXPECT_TRUE(Domain::unit_square().contains_interior(p));
}

TEST(Experiments, ChainSummaryHistogramMode) {
  std::vector<double> th(1000, 0.05);
  for (int i = 0; i < 100; ++i) th[static_cast<std::size_t>(i)] = 0.14;
  const ChainSummary s = summarise_chain(th, 0.02, 0.15, 26, 0.1);
  EXPECT_NEAR(s.mode, 0.0525, 1e-12);
  EXPECT_NEAR(s.mean, 0.05, 1e-12);
  EXPECT_EQ(s.density.size(), 26u);
}

// ---------------------------------------------------------------------------
// Command line.

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "probmesh_cli_test.log";
  const std::string cmd = std::string(PROBMESH_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli("forward --config /nonexistent/x.cfg").code, 2);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("launch").code, 2);
  const CliRun bad_key = run_cli("forward --config " + write_file("pm_bad_key.cfg", "problem = poisson_1d\nfoo = 1\n").string());
  EXPECT_EQ(bad_key.code, 2);
  EXPECT_NE(bad_key.out.find(":2"), std::string::npos) << bad_key.out;
  EXPECT_EQ(run_cli("forward --config " + write_file("pm_bad_problem.cfg", "problem = heat\n").string()).code, 2);
  EXPECT_EQ(run_cli("design --config " + write_file("pm_bad_file.cfg", "design.initial = file\ndesign.file = /nonexistent.csv\n").string()).code, 2);
}

TEST(Cli, NumericalFailureExitsThree) {
  // Strong diffusion leaves a single solution branch.
  const fs::path cfg = write_file("pm_newton.cfg", "crude.theta = 10\ncrude.grid_n = 10\ndesign.m_list = 5\n");
  const CliRun r = run_cli("allen-cahn --out " + (fs::temp_directory_path() / "pm_newton_out").string() + " --config " + cfg.string());
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST(Cli, ForwardIsDeterministic) {
  const fs::path cfg = write_file("pm_fwd.cfg", "problem = poisson_1d\ndesign.m = 12\ndesign.m_list = 10, 20\nforward.samples = 3\n");
  const fs::path a = fs::temp_directory_path() / "pm_fwd_a";
  const fs::path b = fs::temp_directory_path() / "pm_fwd_b";
  ASSERT_EQ(run_cli("forward --config " + cfg.string() + " --out " + a.string() + " --seed 4").code, 0);
  ASSERT_EQ(run_cli("forward --config " + cfg.string() + " --out " + b.string() + " --seed 4").code, 0);
  for (const char* f : {"solution.csv", "samples.csv", "convergence.csv", "design.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(slurp(a / "solution.csv").substr(0, 20), "x1,mu,sigma2,exact\n0");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, ForwardRejectsNonlinearProblem) {
  const fs::path cfg = write_file("pm_ac_fwd.cfg", "problem = allen_cahn_2d\ndesign.m = 9\n");
  const CliRun r = run_cli("forward --config " + cfg.string() + " --out " + (fs::temp_directory_path() / "pm_ac_fwd").string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("linear"), std::string::npos) << r.out;
}

TEST(Cli, InverseAndDesignWriteTheirFiles) {
  const fs::path inv = fs::temp_directory_path() / "pm_inv";
  const fs::path cfg = write_file("pm_inv.cfg", "design.m_list = 5, 10\n");
  ASSERT_EQ(run_cli("inverse --config " + cfg.string() + " --out " + inv.string()).code, 0);
  EXPECT_TRUE(fs::exists(inv / "credible_intervals.csv"));
  EXPECT_TRUE(fs::exists(inv / "posterior_m5_pmm.csv"));
  EXPECT_EQ(slurp(inv / "credible_intervals.csv").substr(0, 17), "m,method,mean,sd\n");
  const fs::path des = fs::temp_directory_path() / "pm_des";
  ASSERT_EQ(run_cli("design --out " + des.string()).code, 0);
  for (const char* f : {"design_initial.csv", "design_optimised.csv", "loss_trace.csv"}) EXPECT_TRUE(fs::exists(des / f)) << f;
  fs::remove_all(inv);
  fs::remove_all(des);
}

TEST(Cli, SelftestPasses) {
  const CliRun r = run_cli("selftest");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace probmesh
