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

#include "probmesh/selftest.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "probmesh/collocation.hpp"
#include "probmesh/errors.hpp"
#include "probmesh/green1d.hpp"
#include "probmesh/inverse.hpp"
#include "probmesh/oracles.hpp"
#include "probmesh/quadrature.hpp"

namespace probmesh {

namespace {

std::string fmt(const char* label, double v) {
  std::ostringstream s;
  s << label << '=' << std::scientific << std::setprecision(2) << v;
  return s.str();
}

SelfCheck quadrature_closed_forms() {
  double worst = 0.0;
  for (int n = 1; n <= 20; ++n)
    for (int k = 0; k <= 2 * n - 1; ++k) {
      const double got = integrate_gl([k](double x) { return std::pow(x, k); }, 0.0, 1.0, n);
      worst = std::max(worst, std::abs(got - 1.0 / (k + 1)));
    }
  const double s = integrate_gl([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 20);
  worst = std::max(worst, std::abs(s - 2.0));
  return {"quadrature_closed_forms", worst < 1e-13, fmt("max_err", worst)};
}

SelfCheck natural_kernel_oracle() {
  double worst = 0.0;
  double worst_lambda = 0.0;
  for (double eps : {2.5, 5.0}) {
    const KernelSpec k = KernelSpec::natural_poisson_1d(eps);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double x = (i + 0.37) / 4.0;
        const double xp = (j + 0.61) / 4.0;
        worst = std::max(worst, std::abs(eval_kernel(k, {x, 0}, {xp, 0}) - oracle::natural_kernel(x, xp, eps)));
        worst_lambda = std::max(worst_lambda, std::abs(eval_derivative(k, {x, 0}, {xp, 0}, 2, 2) - oracle::wendland_c0(x - xp, eps)));
      }
  }
  return {"natural_kernel_vs_quadrature", worst < 1e-8 && worst_lambda < 1e-12,
          fmt("max_err", worst) + " " + fmt("lambda_err", worst_lambda)};
}

SelfCheck dense_likelihood_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double ell = 0.15 + 0.25 * u01(rng);
    const double a = (0.5 + 1.5 * u01(rng)) * (u01(rng) < 0.5 ? -1.0 : 1.0);
    const int m = 3 + static_cast<int>(6 * u01(rng));
    Design d;
    for (int j = 1; j <= m; ++j) d.interior.push_back({(j + 0.3 * (u01(rng) - 0.5)) / (m + 1.0), 0.0});
    d.boundary = {{0.0, 0.0}, {1.0, 0.0}};
    std::vector<Point> x = {{0.1 + 0.8 * u01(rng), 0.0}, {0.1 + 0.8 * u01(rng), 0.0}, {0.1 + 0.8 * u01(rng), 0.0}};
    Eigen::VectorXd y(3);
    for (int i = 0; i < 3; ++i) y(i) = 0.2 * (u01(rng) - 0.5);
    Eigen::VectorXd data(m + 2);
    for (int i = 0; i < m + 2; ++i) data(i) = u01(rng) - 0.5;
    const double gamma = 0.05;
    const KernelSpec k = KernelSpec::squared_exponential(ell, Domain::unit_interval());
    const CollocationPosterior p =
        CollocationModel(k, OperatorSet::linear(OperatorDescriptor::scaled_laplacian(Coefficient::constant(a))), d)
            .condition(Parameter(1.0), data);
    const double got = marginal_log_likelihood(p, ObservationSet::isotropic(x, y, gamma));
    oracle::Dense1D s;
    s.a = a;
    s.ell = ell;
    for (const Point& q : d.interior) s.interior.push_back(q.x);
    s.boundary = {0.0, 1.0};
    s.jitter = p.jitter();
    std::vector<double> xs;
    for (const Point& q : x) xs.push_back(q.x);
    const double want = oracle::dense_marginal_log_likelihood(s, data, xs, y, gamma);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  return {"marginal_likelihood_vs_dense", worst < 1e-6, fmt("max_rel_err", worst)};
}

SelfCheck pcn_prior_preservation() {
  const ParameterModel prior = ParameterModel::gaussian(0.0, 1.0);
  const double lambda = 0.5;
  const int iters = 20000;
  const ChainTrace t = pcn_sample(prior, [](const Eigen::VectorXd&) { return 0.0; }, lambda, iters, 7);
  double m1 = 0.0;
  double m2 = 0.0;
  for (double v : t.theta) {
    m1 += v;
    m2 += v * v;
  }
  m1 /= iters;
  m2 /= iters;
  // AR(1) with rho = sqrt(1 - lambda^2); x^2 has autocorrelation rho^2.
  const double rho = std::sqrt(1.0 - lambda * lambda);
  const double se1 = std::sqrt((1.0 + rho) / (1.0 - rho) / iters);
  const double se2 = std::sqrt(2.0 * (1.0 + rho * rho) / (1.0 - rho * rho) / iters);
  const bool ok = std::abs(m1) < 3.0 * se1 && std::abs(m2 - 1.0) < 3.0 * se2;
  return {"pcn_prior_preservation", ok, fmt("mean", m1) + " " + fmt("second_moment", m2)};
}

Design square_design(int per_axis, int per_edge) {
  Design d;
  d.interior = Domain::unit_square().interior_grid(per_axis);
  d.boundary = Domain::unit_square().boundary_points(per_edge);
  return d;
}

SelfCheck gram_symmetry_psd() {
  double asym = 0.0;
  double min_ratio = 1.0;
  const Domain sq = Domain::unit_square();
  for (const KernelSpec& k : {KernelSpec::squared_exponential(0.3, sq), KernelSpec::integral(KernelSpec::wendland_c2(1.5, sq))}) {
    const CollocationModel model(k, OperatorSet::linear(OperatorDescriptor::laplacian()), square_design(3, 3));
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(model.size()), static_cast<Eigen::Index>(model.size()));
    const auto pts = model.design().all_points();
    const auto& blocks = model.blocks();
    std::size_t r = 0;
    for (const auto& bi : blocks)
      for (const Point& xi : bi.points) {
        std::size_t c = 0;
        for (const auto& bj : blocks)
          for (const Point& xj : bj.points)
            raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) =
                eval_operator_kernel(k, bi.op, bj.op, xi, xj, Parameter(1.0));
        ++r;
      }
    asym = std::max(asym, (raw - raw.transpose()).cwiseAbs().maxCoeff() / raw.cwiseAbs().maxCoeff());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(model.gram(Parameter(1.0))).eigenvalues();
    min_ratio = std::min(min_ratio, ev.minCoeff() / ev.maxCoeff());
  }
  return {"gram_symmetry_psd", asym < 1e-12 && min_ratio > -1e-10, fmt("asymmetry", asym) + " " + fmt("min_eig_ratio", min_ratio)};
}

SelfCheck interpolation_exactness() {
  Design d;
  for (int j = 1; j <= 8; ++j) d.interior.push_back({j / 9.0, 0.0});
  d.boundary = {{0.0, 0.0}, {1.0, 0.0}};
  const OperatorSet ops{OperatorDescriptor::identity(), OperatorDescriptor::boundary_trace(), false};
  const KernelSpec k = KernelSpec::wendland_c2(2.0, Domain::unit_interval());
  Eigen::VectorXd data(10);
  const auto pts = d.all_points();
  for (int i = 0; i < 10; ++i) data(i) = std::sin(3.0 * pts[static_cast<std::size_t>(i)].x);
  const CollocationPosterior p = CollocationModel(k, ops, d).condition(Parameter(1.0), data);
  const Eigen::VectorXd mu = p.mean(pts);
  const double err = (mu - data).cwiseAbs().maxCoeff();
  const double var = p.variance(pts).cwiseAbs().maxCoeff();
  return {"interpolation_exactness", err < 1e-8 && var < 1e-8, fmt("max_err", err) + " " + fmt("max_var", var)};
}

SelfCheck nested_variance() {
  const KernelSpec k = KernelSpec::squared_exponential(0.2, Domain::unit_interval());
  const std::vector<Point> grid = Domain::unit_interval().grid(100);
  Design d;
  d.boundary = {{0.0, 0.0}, {1.0, 0.0}};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  Eigen::VectorXd prev;
  double worst = 0.0;
  for (int step = 0; step < 4; ++step) {
    for (int k2 = 0; k2 < 3; ++k2) d.interior.push_back({u(rng), 0.0});
    const CollocationPosterior p = CollocationModel(k, OperatorSet::linear(OperatorDescriptor::laplacian()), d)
                                       .condition(Parameter(1.0), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.size())));
    const Eigen::VectorXd v = p.variance(grid);
    if (prev.size() > 0) worst = std::max(worst, (v - prev).maxCoeff());
    prev = v;
  }
  // Tolerance: roundoff of prior minus a quadratic form of the same size.
  return {"nested_design_variance", worst <= 1e-8, fmt("max_increase", worst)};
}

SelfCheck error_bound() {
  const KernelSpec k = KernelSpec::squared_exponential(0.25, Domain::unit_interval());
  Design d;
  for (int j = 1; j <= 6; ++j) d.interior.push_back({j / 7.0, 0.0});
  d.boundary = {{0.0, 0.0}, {1.0, 0.0}};
  const CollocationPosterior p = CollocationModel(k, OperatorSet::linear(OperatorDescriptor::laplacian()), d)
                                     .condition(Parameter(1.0), Eigen::VectorXd::Zero(8));
  const std::vector<Point> reps = {{0.23, 0.0}, {0.5, 0.0}, {0.81, 0.0}};
  Eigen::VectorXd c(3);
  c << 1.0, -0.7, 0.4;
  const ErrorBoundReport r = local_error_bound_check(p, c, reps, Domain::unit_interval().grid(100));
  return {"local_error_bound", r.violations == 0, fmt("max_violation", r.max_violation) + " " + fmt("max_error", r.max_error)};
}

SelfCheck fill_distance_brute() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Design d;
  for (int i = 0; i < 12; ++i) d.interior.push_back({u(rng), u(rng)});
  d.boundary = Domain::unit_square().boundary_points(2);
  const std::vector<Point> grid = Domain::unit_square().grid(60);
  double brute = 0.0;
  const auto pts = d.all_points();
  for (const Point& g : grid) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : pts) best = std::min(best, std::sqrt((g.x - p.x) * (g.x - p.x) + (g.y - p.y) * (g.y - p.y)));
    brute = std::max(brute, best);
  }
  const double got = fill_distance(d, grid);
  Design single;
  single.interior = {{0.5, 0.0}};
  const double half = fill_distance(single, Domain::unit_interval().grid(1001));
  const bool ok = std::abs(got - brute) < 1e-15 && std::abs(half - 0.5) < 1e-15;
  return {"fill_distance_brute_force", ok, fmt("diff", std::abs(got - brute))};
}

SelfCheck derivative_fd() {
  const double h = 1e-3;
  double worst = 0.0;
  const auto lap = [&](const std::function<double(Point)>& f, Point p, int dim) {
    double s = (f({p.x + h, p.y}) - 2.0 * f(p) + f({p.x - h, p.y})) / (h * h);
    if (dim == 2) s += (f({p.x, p.y + h}) - 2.0 * f(p) + f({p.x, p.y - h})) / (h * h);
    return s;
  };
  const Domain sq = Domain::unit_square();
  const Domain iv = Domain::unit_interval();
  const std::vector<KernelSpec> specs = {KernelSpec::squared_exponential(0.4, iv), KernelSpec::squared_exponential(0.5, sq),
                                         KernelSpec::wendland_c2(1.0, sq), KernelSpec::natural_poisson_1d(2.5)};
  for (const KernelSpec& k : specs) {
    const int dim = k.dim();
    const std::vector<std::pair<Point, Point>> pairs =
        dim == 1 ? std::vector<std::pair<Point, Point>>{{{0.3, 0}, {0.55, 0}}, {{0.7, 0}, {0.2, 0}}}
                 : std::vector<std::pair<Point, Point>>{{{0.3, 0.4}, {0.5, 0.6}}, {{0.7, 0.2}, {0.45, 0.35}}};
    for (const auto& [x, xp] : pairs) {
      const double d20 = eval_derivative(k, x, xp, 2, 0);
      const double fd20 = lap([&](Point p) { return eval_kernel(k, p, xp); }, x, dim);
      const double d02 = eval_derivative(k, x, xp, 0, 2);
      const double fd02 = lap([&](Point p) { return eval_kernel(k, x, p); }, xp, dim);
      for (const auto& [a, b] : {std::pair{d20, fd20}, std::pair{d02, fd02}})
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      if (k.supports(2, 2)) {
        const double d22 = eval_derivative(k, x, xp, 2, 2);
        const double fd22 = lap([&](Point p) { return eval_derivative(k, x, p, 2, 0); }, xp, dim);
        worst = std::max(worst, std::abs(d22 - fd22) / std::max(1.0, std::abs(d22)));
      }
    }
  }
  return {"derivative_finite_difference", worst < 1e-5, fmt("max_rel_err", worst)};
}

}  // namespace

std::vector<SelfCheck> run_selftest(const std::function<void(const SelfCheck&)>& progress) {
  using Fn = SelfCheck (*)();
  const std::pair<const char*, Fn> checks[] = {
      {"quadrature_closed_forms", quadrature_closed_forms},
      {"natural_kernel_vs_quadrature", natural_kernel_oracle},
      {"marginal_likelihood_vs_dense", dense_likelihood_oracle},
      {"pcn_prior_preservation", pcn_prior_preservation},
      {"gram_symmetry_psd", gram_symmetry_psd},
      {"interpolation_exactness", interpolation_exactness},
      {"nested_design_variance", nested_variance},
      {"local_error_bound", error_bound},
      {"fill_distance_brute_force", fill_distance_brute},
      {"derivative_finite_difference", derivative_fd},
  };
  std::vector<SelfCheck> out;
  for (const auto& [name, f] : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    SelfCheck c;
    try {
      c = f();
    } catch (const std::exception& e) {
      c.name = name;
      c.passed = false;
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress(c);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace probmesh
