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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "probmesh/errors.hpp"
#include "probmesh/inverse.hpp"
#include "probmesh/oracles.hpp"

namespace probmesh {
namespace {

const Domain kUnit = Domain::unit_interval();

struct RandomInstance {
  Design design;
  KernelSpec kernel = KernelSpec::squared_exponential(0.2, kUnit);
  OperatorSet ops;
  Eigen::VectorXd data;
  ObservationSet obs;
  oracle::Dense1D dense;
  std::vector<double> xs;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RandomInstance r;
  const double ell = 0.15 + 0.25 * u01(rng);
  const double a = (0.5 + 1.5 * u01(rng)) * (u01(rng) < 0.5 ? -1.0 : 1.0);
  const int m = 3 + static_cast<int>(8 * u01(rng));
  const int n = 2 + static_cast<int>(5 * u01(rng));
  for (int j = 1; j <= m; ++j) r.design.interior.push_back({(j + 0.3 * (u01(rng) - 0.5)) / (m + 1.0)});
  r.design.boundary = {{0.0}, {1.0}};
  r.kernel = KernelSpec::squared_exponential(ell, kUnit);
  r.ops = OperatorSet::linear(OperatorDescriptor::scaled_laplacian(Coefficient::constant(a)));
  r.data.resize(m + 2);
  for (int i = 0; i < m + 2; ++i) r.data(i) = u01(rng) - 0.5;
  std::vector<Point> x;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x.push_back({0.05 + 0.9 * u01(rng)});
    r.xs.push_back(x.back().x);
    y(i) = 0.2 * (u01(rng) - 0.5);
  }
  r.obs = ObservationSet::isotropic(x, y, 0.01 + 0.1 * u01(rng));
  r.dense.a = a;
  r.dense.ell = ell;
  for (const Point& q : r.design.interior) r.dense.interior.push_back(q.x);
  r.dense.boundary = {0.0, 1.0};
  return r;
}

TEST(MarginalLikelihood, MatchesDenseOracleOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    RandomInstance r = random_instance(rng);
    const CollocationPosterior p = CollocationModel(r.kernel, r.ops, r.design).condition(Parameter(1.0), r.data);
    r.dense.jitter = p.jitter();
    const double gamma = std::sqrt(r.obs.noise_cov(0, 0));
    const double want = oracle::dense_marginal_log_likelihood(r.dense, r.data, r.xs, r.obs.values, gamma);
    EXPECT_NEAR(marginal_log_likelihood(p, r.obs), want, 1e-6 * std::max(1.0, std::abs(want))) << "trial " << trial;
  }
}

TEST(MarginalLikelihood, GaussianDensityMatchesOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 16; ++i) a(i / 4, i % 4) = n(rng);
    const Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(4, 4);
    Eigen::VectorXd y(4), mu(4);
    for (int i = 0; i < 4; ++i) {
      y(i) = n(rng);
      mu(i) = n(rng);
    }
    EXPECT_NEAR(gaussian_log_density(y, mu, cov), oracle::gaussian_log_density(y, mu, cov), 1e-10);
  }
  EXPECT_THROW(gaussian_log_density(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), -Eigen::MatrixXd::Identity(2, 2)),
               NumericalError);
}

TEST(MarginalLikelihood, ReducesToPlugInWithoutSolverVariance) {
  Design d;
  d.interior = {{0.25}, {0.5}, {0.75}};
  d.boundary = {{0.0}, {1.0}};
  const OperatorSet ops{OperatorDescriptor::identity(), OperatorDescriptor::boundary_trace(), false};
  Eigen::VectorXd data(5);
  data << 0.3, -0.2, 0.5, 0.0, 0.0;
  const CollocationPosterior p = CollocationModel(KernelSpec::wendland_c2(2.0, kUnit), ops, d).condition(Parameter(1.0), data);
  Eigen::VectorXd y(3);
  y << 0.31, -0.18, 0.52;
  const ObservationSet obs = ObservationSet::isotropic(d.interior, y, 0.05);
  EXPECT_NEAR(marginal_log_likelihood(p, obs), plug_in_log_likelihood(p, obs), 1e-6);
  const Eigen::VectorXd r = y - data.head(3);
  const double want = -0.5 * r.squaredNorm() / 0.0025 - 1.5 * std::log(2.0 * std::numbers::pi * 0.0025);
  EXPECT_NEAR(plug_in_log_likelihood(p, obs), want, 1e-8);
}

TEST(MarginalLikelihood, DifferenceFromPlugInMatchesIdentity) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomInstance r = random_instance(rng);
    const CollocationPosterior p = CollocationModel(r.kernel, r.ops, r.design).condition(Parameter(1.0), r.data);
    const Eigen::MatrixXd sigma = p.cov(r.obs.locations);
    const Eigen::VectorXd res = r.obs.values - p.mean(r.obs.locations);
    const Eigen::MatrixXd& gam = r.obs.noise_cov;
    const Eigen::Index n = gam.rows();
    const Eigen::MatrixXd ginv = gam.inverse();
    const double log_det = std::log((Eigen::MatrixXd::Identity(n, n) + ginv * sigma).determinant());
    const double quad = res.dot(((sigma + gam).inverse() - ginv) * res);
    const double diff = marginal_log_likelihood(p, r.obs) - plug_in_log_likelihood(p, r.obs);
    EXPECT_NEAR(diff, -0.5 * log_det - 0.5 * quad, 1e-8 * std::max(1.0, std::abs(diff))) << "trial " << trial;
  }
}

TEST(MarginalLikelihood, InvariantToObservationOrder) {
  std::mt19937_64 rng(5);
  const RandomInstance r = random_instance(rng);
  const CollocationPosterior p = CollocationModel(r.kernel, r.ops, r.design).condition(Parameter(1.0), r.data);
  std::vector<int> perm(r.obs.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  ObservationSet q = r.obs;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    q.locations[i] = r.obs.locations[static_cast<std::size_t>(perm[i])];
    q.values(static_cast<Eigen::Index>(i)) = r.obs.values(perm[i]);
  }
  EXPECT_NEAR(marginal_log_likelihood(p, q), marginal_log_likelihood(p, r.obs), 1e-10);
}

TEST(MarginalLikelihood, PeaksNearTrueThetaForFineDesign) {
  const ProblemDefinition prob = parametric_poisson_1d();
  const std::vector<Point> x = {{0.25}, {0.75}};
  Eigen::VectorXd y(2);
  for (int i = 0; i < 2; ++i) y(i) = prob.exact_solution(x[static_cast<std::size_t>(i)], 1.0);
  const ObservationSet obs = ObservationSet::isotropic(x, y, 0.001);
  Design d;
  for (int j = 1; j <= 40; ++j) d.interior.push_back({j / 41.0});
  d.boundary = {{0.0}, {1.0}};
  const CollocationModel model(KernelSpec::natural_poisson_1d(2.5), prob.operator_set(), d);
  Eigen::VectorXd data(42);
  data << prob.forcing_at(d.interior), prob.boundary_at(d.boundary);
  const EvaluationCache cache = model.evaluation(x);
  double best = 0.0, best_ll = -std::numeric_limits<double>::infinity();
  for (double theta = 0.5; theta <= 1.5; theta += 0.005) {
    const double ll = marginal_log_likelihood(model.condition(Parameter(theta), data), cache, obs);
    if (ll > best_ll) {
      best_ll = ll;
      best = theta;
    }
  }
  EXPECT_NEAR(best, 1.0, 0.02);
}

TEST(Pcn, ZeroPotentialAcceptsEverything) {
  const ChainTrace t = pcn_sample(ParameterModel::gaussian(0.0, 1.0), [](const Eigen::VectorXd&) { return 0.0; }, 0.3, 500, 1);
  EXPECT_EQ(t.size(), 500u);
  EXPECT_DOUBLE_EQ(t.acceptance_rate(), 1.0);
}

TEST(Pcn, PreservesPriorMomentsOverSeeds) {
  const double lambda = 0.5;
  const int iters = 20000;
  const double rho = std::sqrt(1.0 - lambda * lambda);
  for (std::uint64_t seed : {1, 2, 3}) {
    const ChainTrace t = pcn_sample(ParameterModel::gaussian(0.0, 1.0), [](const Eigen::VectorXd&) { return 0.0; }, lambda, iters, seed);
    double m1 = 0.0, m2 = 0.0;
    for (double v : t.theta) {
      m1 += v;
      m2 += v * v;
    }
    m1 /= iters;
    m2 /= iters;
    const double ess = iters * (1.0 - rho) / (1.0 + rho);
    EXPECT_LT(std::abs(m1), 4.0 / std::sqrt(ess)) << "seed " << seed;
    EXPECT_LT(std::abs(m2 - m1 * m1 - 1.0), 0.1) << "seed " << seed;
  }
}

TEST(Pcn, ConjugateGaussianPosterior) {
  // theta ~ N(0, 1), y | theta ~ N(theta, s^2).
  const double y = 0.8, s = 0.5;
  const double post_mean = y / (1.0 + s * s);
  const double post_sd = std::sqrt(s * s / (1.0 + s * s));
  const auto phi = [&](const Eigen::VectorXd& th) { return 0.5 * (y - th(0)) * (y - th(0)) / (s * s); };
  const ChainTrace t = pcn_sample(ParameterModel::gaussian(0.0, 1.0), phi, 0.6, 40000, 9);
  const std::vector<double> th(t.theta.begin() + 1000, t.theta.end());
  const double mean = std::accumulate(th.begin(), th.end(), 0.0) / th.size();
  double var = 0.0;
  for (double v : th) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / th.size());
  const double se = post_sd * std::sqrt(integrated_autocorrelation_time(th) / th.size());
  EXPECT_LT(std::abs(mean - post_mean), 3.0 * se);
  EXPECT_NEAR(sd, post_sd, 0.05 * post_sd);
  EXPECT_GT(t.acceptance_rate(), 0.0);
  EXPECT_LT(t.acceptance_rate(), 1.0);
}

TEST(Pcn, RejectsNonGaussianPrior) {
  EXPECT_THROW(pcn_sample(ParameterModel::uniform(0.0, 1.0), [](const Eigen::VectorXd&) { return 0.0; }, 0.3, 10, 1),
               ConfigError);
}

TEST(Pcn, FieldPriorOnPoisson) {
  const ParameterModel field = ParameterModel::field({0.0, 0.25, 0.5, 0.75, 1.0}, KernelSpec::squared_exponential(0.3, kUnit),
                                                     ParameterModel::Transform::Exp);
  EXPECT_EQ(field.dimension(), 5);
  const ChainTrace t = pcn_sample(field, [](const Eigen::VectorXd& v) { return 0.5 * (v.mean() - 1.0) * (v.mean() - 1.0); }, 0.3, 200, 4);
  ASSERT_EQ(t.states.size(), 200u);
  for (const auto& s : t.states) {
    EXPECT_EQ(s.size(), 5);
    EXPECT_GT(s.minCoeff(), 0.0);
  }
  const Parameter p = field.to_parameter(t.states.back());
  EXPECT_TRUE(p.is_field());
  EXPECT_NEAR(p.at({0.25}), t.states.back()(1), 1e-14);
}

TEST(PseudoMarginal, ExactEstimatorMatchesRandomWalkMetropolis) {
  const auto ll = [](double th) { return -0.5 * (th - 0.3) * (th - 0.3) / 0.04; };
  const ParameterModel prior = ParameterModel::gaussian(0.0, 2.0);
  ExactEstimator est(ll);
  PseudoMarginalOptions po;
  po.initial_theta = 0.1;
  po.proposal_sd = 0.2;
  po.iters = 3000;
  po.seed = 21;
  const ChainTrace a = pseudo_marginal_mcmc(est, prior, po);
  const ChainTrace b = random_walk_metropolis([&](double th) { return ll(th) + prior.log_prior(th); }, 0.1, 0.2, 3000, 21);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.accepted, b.accepted);
  EXPECT_TRUE(a.solution_index.empty());
  EXPECT_GT(a.acceptance_rate(), 0.0);
  EXPECT_LT(a.acceptance_rate(), 1.0);
}

TEST(PseudoMarginal, RejectsOutsideUniformSupport) {
  ExactEstimator est([](double) { return 0.0; });
  PseudoMarginalOptions po;
  po.initial_theta = 0.05;
  po.proposal_sd = 0.5;
  po.iters = 2000;
  const ChainTrace t = pseudo_marginal_mcmc(est, ParameterModel::uniform(0.02, 0.15), po);
  for (double v : t.theta) {
    EXPECT_GT(v, 0.02);
    EXPECT_LT(v, 0.15);
  }
  po.initial_theta = 0.5;
  EXPECT_THROW(pseudo_marginal_mcmc(est, ParameterModel::uniform(0.02, 0.15), po), ConfigError);
}

// Deterministic target over three solution indices.
class IndexWeights : public LikelihoodEstimator {
 public:
  int solution_count() const override { return 3; }
  double log_estimate(double, int i, double, std::mt19937_64&) override { return std::log(1.0 + i); }
};

TEST(PseudoMarginal, DetailedBalanceOnIndices) {
  IndexWeights est;
  PseudoMarginalOptions po;
  po.initial_theta = 0.5;
  po.proposal_sd = 0.05;
  po.iters = 60000;
  po.seed = 5;
  const ChainTrace t = pseudo_marginal_mcmc(est, ParameterModel::uniform(0.0, 1.0), po);
  ASSERT_EQ(t.solution_index.size(), t.size());
  long flux[3][3] = {};
  long visits[3] = {};
  for (std::size_t k = 1; k < t.size(); ++k) {
    ++flux[t.solution_index[k - 1]][t.solution_index[k]];
    ++visits[t.solution_index[k]];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double n = static_cast<double>(flux[i][j] + flux[j][i]);
      ASSERT_GT(n, 100.0);
      EXPECT_LT(std::abs(static_cast<double>(flux[i][j] - flux[j][i])), 3.0 * std::sqrt(n)) << i << "<->" << j;
    }
  const double total = static_cast<double>(t.size() - 1);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(visits[i] / total, (1.0 + i) / 6.0, 0.02);
}

TEST(PseudoMarginal, HalfCauchyPriorPreserved) {
  ExactEstimator est([](double) { return 0.0; });
  PseudoMarginalOptions po;
  po.initial_theta = 0.5;
  po.proposal_sd = 0.1;
  po.iters = 10000;
  po.seed = 13;
  po.lengthscale.sample = true;
  po.lengthscale.initial = 1.0;
  po.lengthscale.scale = 1.0;
  po.lengthscale.proposal_sd = 2.0;
  const ChainTrace t = pseudo_marginal_mcmc(est, ParameterModel::uniform(0.0, 1.0), po);
  ASSERT_EQ(t.lengthscale.size(), t.size());
  std::vector<double> ell = t.lengthscale;
  std::sort(ell.begin(), ell.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < ell.size(); ++i) {
    const double f = 2.0 / std::numbers::pi * std::atan(ell[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / ell.size()), std::abs(f - static_cast<double>(i + 1) / ell.size())});
  }
  EXPECT_LT(ks, 0.05);
}

TEST(PseudoMarginal, FixedLengthscaleLeavesThetaChainUnchanged) {
  const auto ll = [](double th) { return -std::abs(th - 0.5); };
  ExactEstimator est(ll);
  PseudoMarginalOptions po;
  po.initial_theta = 0.5;
  po.proposal_sd = 0.1;
  po.iters = 500;
  po.lengthscale.initial = 0.3;
  const ChainTrace a = pseudo_marginal_mcmc(est, ParameterModel::uniform(0.0, 1.0), po);
  po.lengthscale.initial = 0.7;
  const ChainTrace b = pseudo_marginal_mcmc(est, ParameterModel::uniform(0.0, 1.0), po);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_TRUE(a.lengthscale.empty());
}

TEST(HalfCauchy, Density) {
  EXPECT_NEAR(half_cauchy_log_density(0.0 + 1e-300, 1.0), std::log(2.0 / std::numbers::pi), 1e-12);
  EXPECT_NEAR(half_cauchy_log_density(1.0, 1.0), std::log(1.0 / std::numbers::pi), 1e-12);
  EXPECT_EQ(half_cauchy_log_density(-1.0, 1.0), -std::numeric_limits<double>::infinity());
}

// Linear latent problem: a u'' + alpha u = g, so A2 is linear and the latent
// integral has a closed form.
struct LinearLatent {
  double a = 1.0, alpha = 2.0, ell = 0.25, gamma = 0.05;
  ProblemDefinition problem;
  Design design;
  KernelSpec kernel = KernelSpec::squared_exponential(0.25, kUnit);
  ObservationSet obs;

  LinearLatent() {
    problem.name = "linear_latent";
    problem.domain = kUnit;
    problem.interior = OperatorDescriptor::scaled_laplacian(Coefficient::constant(a));
    problem.forcing = [](Point x) { return std::sin(3.0 * x.x); };
    problem.boundary = [](Point x) { return x.x < 0.5 ? 0.1 : -0.1; };
    const double al = alpha;
    problem.split = SemiLinearSplit{problem.interior, [al](double u, double) { return al * u; },
                                    [al](double v, double) { return v / al; }};
    design.interior = {{0.2}, {0.5}, {0.8}};
    design.boundary = {{0.0}, {1.0}};
    kernel = KernelSpec::squared_exponential(ell, kUnit);
    std::vector<Point> x = {{0.1}, {0.3}, {0.45}, {0.6}, {0.9}};
    Eigen::VectorXd y(5);
    y << 0.02, -0.03, 0.05, 0.01, -0.04;
    obs = ObservationSet::isotropic(x, y, gamma);
  }

  double exact() const {
    const Eigen::VectorXd g = problem.forcing_at(design.interior);
    const Eigen::VectorXd b = problem.boundary_at(design.boundary);
    const auto post = semi_linear_posterior(kernel, OperatorSet::semi_linear(problem.interior), design, g, b,
                                            Eigen::VectorXd::Zero(3), Parameter(1.0), *problem.split);
    oracle::Dense1D s;
    s.a = a;
    s.ell = ell;
    s.interior = {0.2, 0.5, 0.8};
    s.boundary = {0.0, 1.0};
    s.jitter = post->jitter();
    std::vector<double> xs;
    for (const Point& p : obs.locations) xs.push_back(p.x);
    return oracle::linear_latent_log_likelihood(s, alpha, g, b, xs, obs.values, gamma);
  }

  SemiLinearEstimator estimator(int n_importance) const {
    SemiLinearEstimator::Options o;
    o.n_importance = n_importance;
    o.importance_scale = 0.5;
    const Eigen::VectorXd centre = Eigen::VectorXd::Constant(3, 0.1);
    return SemiLinearEstimator(problem, kernel, design, obs, [centre](double) { return std::vector<Eigen::VectorXd>{centre}; }, o);
  }
};

TEST(SemiLinearEstimator, UnbiasedOnLinearLatentProblem) {
  const LinearLatent lin;
  const double exact = lin.exact();
  SemiLinearEstimator est = lin.estimator(1);
  std::mt19937_64 rng(1234);
  const int draws = 2000;
  std::vector<double> ratio(draws);
  for (int k = 0; k < draws; ++k) ratio[static_cast<std::size_t>(k)] = std::exp(est.log_estimate(1.0, 0, lin.ell, rng) - exact);
  const double mean = std::accumulate(ratio.begin(), ratio.end(), 0.0) / draws;
  double var = 0.0;
  for (double r : ratio) var += (r - mean) * (r - mean);
  const double se = std::sqrt(var / (draws - 1) / draws);
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * se) << "mean=" << mean << " se=" << se;
}

TEST(SemiLinearEstimator, AveragedEstimatesStableAcrossSeeds) {
  const LinearLatent lin;
  const double exact = lin.exact();
  SemiLinearEstimator est = lin.estimator(500);
  std::vector<double> means, ses;
  for (std::uint64_t seed : {1, 2, 3}) {
    std::mt19937_64 rng(seed);
    std::vector<double> r;
    for (int k = 0; k < 40; ++k) r.push_back(std::exp(est.log_estimate(1.0, 0, lin.ell, rng) - exact));
    const double m = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
    double v = 0.0;
    for (double x : r) v += (x - m) * (x - m);
    means.push_back(m);
    ses.push_back(std::sqrt(v / (r.size() - 1) / r.size()));
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      EXPECT_LT(std::abs(means[i] - means[j]), 3.0 * std::hypot(ses[i], ses[j]) + 1e-12);
  EXPECT_NEAR(means[0], 1.0, 0.05);
}

TEST(SemiLinearEstimator, PlugInEstimatorIsDeterministic) {
  const LinearLatent lin;
  SemiLinearEstimator::Options o;
  o.plug_in = true;
  o.n_importance = 1;
  SemiLinearEstimator est(lin.problem, lin.kernel, lin.design, lin.obs,
                          [](double) { return std::vector<Eigen::VectorXd>{Eigen::VectorXd::Constant(3, 0.1)}; }, o);
  std::mt19937_64 r1(1), r2(2);
  EXPECT_EQ(est.log_estimate(1.0, 0, lin.ell, r1), est.log_estimate(1.0, 0, lin.ell, r2));
}

TEST(SemiLinearPosterior, LinearSplitMatchesDenseConstruction) {
  const LinearLatent lin;
  const Eigen::VectorXd g = lin.problem.forcing_at(lin.design.interior);
  const Eigen::VectorXd b = lin.problem.boundary_at(lin.design.boundary);
  const Eigen::VectorXd z = 0.5 * g;
  const auto post = semi_linear_posterior(lin.kernel, OperatorSet::semi_linear(lin.problem.interior), lin.design, g, b, z,
                                          Parameter(1.0), *lin.problem.split);
  ASSERT_TRUE(post.has_value());
  // Functionals [a D2; I; I] at interior, interior, boundary.
  const std::vector<double> pts = {0.2, 0.5, 0.8, 0.2, 0.5, 0.8, 0.0, 1.0};
  const auto is_lap = [](int i) { return i < 3; };
  Eigen::MatrixXd gram(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double r = pts[i] - pts[j];
      gram(i, j) = is_lap(i) && is_lap(j) ? oracle::se_d4(r, lin.ell)
                   : is_lap(i) || is_lap(j) ? oracle::se_d2(r, lin.ell)
                                            : oracle::se(r, lin.ell);
    }
  gram.diagonal().array() += post->jitter();
  Eigen::VectorXd data(8);
  data << z, (g - z) / lin.alpha, b;
  const std::vector<double> xs = {0.05, 0.33, 0.61, 0.97};
  Eigen::MatrixXd cross(4, 8);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 8; ++j) cross(i, j) = is_lap(j) ? oracle::se_d2(xs[i] - pts[j], lin.ell) : oracle::se(xs[i] - pts[j], lin.ell);
  const Eigen::VectorXd want = cross * gram.fullPivLu().solve(data);
  std::vector<Point> xp;
  for (double x : xs) xp.push_back({x});
  EXPECT_LT((post->mean(xp) - want).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SemiLinearPosterior, AllenCahnZeroIdentityBlock) {
  const ProblemDefinition p = allen_cahn_2d();
  Design d;
  d.interior = Domain::unit_square().interior_grid(3);
  d.boundary = {};
  for (const Point& q : Domain::unit_square().boundary_points(4))
    if (q.x > 0.0 && q.x < 1.0) d.boundary.push_back(q);
  const Eigen::VectorXd g = p.forcing_at(d.interior);
  const Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.boundary.size()));
  const auto post = semi_linear_posterior(KernelSpec::squared_exponential(0.2, p.domain), p.operator_set(), d, g, b, g,
                                          Parameter(0.04), *p.split);
  ASSERT_TRUE(post.has_value());
  EXPECT_LT(post->mean(d.interior).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Calibration, SinglePointAndSurface) {
  const CalibrationResult one = calibrate_empirical_bayes([](double e) { return -e; }, {0.3});
  EXPECT_DOUBLE_EQ(one.best, 0.3);
  ASSERT_EQ(one.surface.size(), 1u);
  const CalibrationResult q = calibrate_empirical_bayes([](double e) { return -(e - 0.37) * (e - 0.37); }, {0.1, 0.2, 0.3, 0.4, 0.5});
  EXPECT_NEAR(q.best, 0.37, 1e-6);
  EXPECT_EQ(q.surface.size(), 5u);
  EXPECT_THROW(calibrate_empirical_bayes([](double) -> double { throw NumericalError("x"); }, {0.1, 0.2}), NumericalError);
  EXPECT_THROW(calibrate_empirical_bayes([](double e) { return e; }, {}), ConfigError);
}

TEST(Calibration, RecoversSyntheticLengthscale) {
  const double ell_true = 0.2, gamma = 0.01;
  std::vector<double> x;
  for (int i = 0; i < 120; ++i) x.push_back((i + 0.5) / 120.0);
  const auto cov = [&](double ell) {
    Eigen::MatrixXd k(120, 120);
    for (int i = 0; i < 120; ++i)
      for (int j = 0; j < 120; ++j) k(i, j) = oracle::se(x[i] - x[j], ell);
    k.diagonal().array() += gamma * gamma;
    return k;
  };
  const Eigen::MatrixXd l = cov(ell_true).llt().matrixL();
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.05 * i);
  for (std::uint64_t seed : {1, 2, 3}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Eigen::VectorXd xi(120);
    for (int i = 0; i < 120; ++i) xi(i) = n(rng);
    const Eigen::VectorXd y = l * xi;
    const auto ll = [&](double ell) { return oracle::gaussian_log_density(y, Eigen::VectorXd::Zero(120), cov(ell)); };
    EXPECT_NEAR(calibrate_empirical_bayes(ll, grid).best, ell_true, 0.05) << "seed " << seed;
  }
}

TEST(GridPosterior, NormalisedGaussian) {
  std::vector<double> th, lp;
  for (int i = 0; i <= 400; ++i) {
    th.push_back(-1.0 + 3.0 * i / 400.0);
    lp.push_back(-0.5 * std::pow((th.back() - 0.5) / 0.2, 2));
  }
  const GridPosterior g = grid_posterior(th, lp);
  double mass = 0.0;
  for (std::size_t i = 1; i < th.size(); ++i) mass += 0.5 * (g.density[i] + g.density[i - 1]) * (th[i] - th[i - 1]);
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(g.mean, 0.5, 1e-6);
  EXPECT_NEAR(g.sd, 0.2, 1e-3);
  EXPECT_NEAR(g.mode, 0.5, 1e-9);
  const GridPosterior a = adaptive_grid_posterior([](double t) { return -0.5 * std::pow((t - 1.0) / 0.01, 2); }, 0.1, 10.0);
  EXPECT_NEAR(a.mean, 1.0, 1e-4);
  EXPECT_NEAR(a.sd, 0.01, 5e-4);
}

TEST(Diagnostics, AutocorrelationTimeOfAr1) {
  const double rho = 0.8;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::vector<double> x(100000);
  double v = 0.0;
  for (double& e : x) e = v = rho * v + std::sqrt(1.0 - rho * rho) * n(rng);
  EXPECT_NEAR(integrated_autocorrelation_time(x), (1.0 + rho) / (1.0 - rho), 0.9);
}

TEST(TraceCsv, HeaderAndRows) {
  ExactEstimator est([](double) { return 0.0; }, 3);
  PseudoMarginalOptions po;
  po.initial_theta = 0.05;
  po.proposal_sd = 0.01;
  po.iters = 20;
  po.seed = 42;
  const ChainTrace t = pseudo_marginal_mcmc(est, ParameterModel::uniform(0.02, 0.15), po);
  const auto dir = std::filesystem::temp_directory_path() / "probmesh_trace_test";
  std::filesystem::create_directories(dir);
  write_trace_csv((dir / "t.csv").string(), t);
  write_trace_meta((dir / "t.meta").string(), t);
  std::ifstream in(dir / "t.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iter,theta,loglike,accepted,solution_index,lengthscale");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 20);
  std::ifstream meta(dir / "t.meta");
  const std::string text((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("42"), std::string::npos);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace probmesh
