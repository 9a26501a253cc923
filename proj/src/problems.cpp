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

#include "probmesh/problems.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "probmesh/errors.hpp"

namespace probmesh {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

OperatorSet ProblemDefinition::operator_set() const {
  if (split) return OperatorSet::semi_linear(split->a1);
  return OperatorSet::linear(interior);
}

Eigen::VectorXd ProblemDefinition::forcing_at(const std::vector<Point>& pts) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) v(static_cast<Eigen::Index>(i)) = forcing(pts[i]);
  return v;
}

Eigen::VectorXd ProblemDefinition::boundary_at(const std::vector<Point>& pts) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) v(static_cast<Eigen::Index>(i)) = boundary(pts[i]);
  return v;
}

std::vector<Point> ProblemDefinition::boundary_design(int per_edge) const {
  return domain.boundary_points(per_edge);
}

ProblemDefinition poisson_1d() {
  ProblemDefinition p;
  p.name = "poisson_1d";
  p.domain = Domain::unit_interval();
  p.interior = OperatorDescriptor::laplacian();
  p.forcing = [](Point x) { return -std::sin(kTwoPi * x.x); };
  p.boundary = [](Point) { return 0.0; };
  p.exact_solution = [](Point x, double) { return std::sin(kTwoPi * x.x) / (kTwoPi * kTwoPi); };
  return p;
}

ProblemDefinition parametric_poisson_1d() {
  ProblemDefinition p = poisson_1d();
  p.name = "parametric_poisson_1d";
  p.interior = OperatorDescriptor::scaled_laplacian(Coefficient::theta());
  p.exact_solution = [](Point x, double theta) {
    if (!(theta > 0.0)) throw DomainError("theta must be positive");
    return std::sin(kTwoPi * x.x) / (theta * kTwoPi * kTwoPi);
  };
  p.theta_dependent = true;
  return p;
}

ProblemDefinition allen_cahn_2d() {
  ProblemDefinition p;
  p.name = "allen_cahn_2d";
  p.domain = Domain::unit_square();
  using Term = OperatorDescriptor::Term;
  p.interior = OperatorDescriptor::linear_combination(
      {Term{Coefficient::theta(-1.0), OperatorDescriptor::laplacian()},
       Term{Coefficient::inverse_theta(-1.0), OperatorDescriptor::identity()}});
  p.forcing = [](Point) { return 0.0; };
  p.boundary = [](Point x) {
    const bool vertical = x.x <= 1e-12 || x.x >= 1.0 - 1e-12;
    return vertical ? 1.0 : -1.0;
  };
  p.split = SemiLinearSplit{
      p.interior,
      [](double u, double theta) { return u * u * u / theta; },
      [](double v, double theta) { return std::cbrt(theta * v); },
  };
  p.solution_count = 3;
  p.theta_dependent = true;
  return p;
}

ProblemDefinition problem_by_name(const std::string& name) {
  if (name == "poisson_1d") return poisson_1d();
  if (name == "parametric_poisson_1d") return parametric_poisson_1d();
  if (name == "allen_cahn_2d" || name == "allen_cahn") return allen_cahn_2d();
  throw ConfigError("unknown problem '" + name + "'");
}

GridField::GridField(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (n < 2) throw DomainError("grid field needs n >= 2");
  if (values_.size() != static_cast<std::size_t>(n + 1) * (n + 1))
    throw DomainError("grid field value count mismatch");
}

double GridField::at(Point p) const {
  const double x = std::clamp(p.x, 0.0, 1.0) * n_;
  const double y = std::clamp(p.y, 0.0, 1.0) * n_;
  const int i = std::min(static_cast<int>(x), n_ - 1);
  const int j = std::min(static_cast<int>(y), n_ - 1);
  const double s = x - i;
  const double t = y - j;
  return (1 - s) * (1 - t) * value(i, j) + s * (1 - t) * value(i + 1, j) +
         (1 - s) * t * value(i, j + 1) + s * t * value(i + 1, j + 1);
}

double GridField::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

double GridField::l2_distance(const GridField& other) const {
  if (other.n_ != n_) throw DomainError("grid fields on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) s += (values_[k] - other.values_[k]) * (values_[k] - other.values_[k]);
  return std::sqrt(s / static_cast<double>(values_.size()));
}

namespace {

GridField boundary_filled(const ProblemDefinition& problem, int n, double interior) {
  std::vector<double> v(static_cast<std::size_t>(n + 1) * (n + 1), interior);
  GridField f(n, std::move(v));
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    f.value(0, k) = problem.boundary({0.0, t});
    f.value(n, k) = problem.boundary({1.0, t});
    f.value(k, 0) = problem.boundary({t, 0.0});
    f.value(k, n) = problem.boundary({t, 1.0});
  }
  // Corners are never read by the five-point stencil.
  return f;
}

double laplacian_h(const GridField& u, int i, int j) {
  const double h = u.h();
  return (u.value(i - 1, j) + u.value(i + 1, j) + u.value(i, j - 1) + u.value(i, j + 1) -
          4.0 * u.value(i, j)) /
         (h * h);
}

Eigen::VectorXd residual_vector(const GridField& u, double theta) {
  const int n = u.n();
  const int m = n - 1;
  Eigen::VectorXd r(m * m);
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      const double v = u.value(i, j);
      r((j - 1) * m + (i - 1)) = -theta * laplacian_h(u, i, j) + (v * v * v - v) / theta;
    }
  }
  return r;
}

CrudeSolution newton(GridField u, double theta, const std::string& label) {
  const int n = u.n();
  const int m = n - 1;
  const double h2 = u.h() * u.h();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::VectorXd r = residual_vector(u, theta);
  double res = r.lpNorm<Eigen::Infinity>();
  double merit = r.squaredNorm();
  for (int it = 0; it < 100; ++it) {
    if (res < 1e-10) return {label, std::move(u), res, it};
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(5 * m * m));
    for (int j = 1; j < n; ++j) {
      for (int i = 1; i < n; ++i) {
        const int row = (j - 1) * m + (i - 1);
        const double v = u.value(i, j);
        trip.emplace_back(row, row, 4.0 * theta / h2 + (3.0 * v * v - 1.0) / theta);
        if (i > 1) trip.emplace_back(row, row - 1, -theta / h2);
        if (i < n - 1) trip.emplace_back(row, row + 1, -theta / h2);
        if (j > 1) trip.emplace_back(row, row - m, -theta / h2);
        if (j < n - 1) trip.emplace_back(row, row + m, -theta / h2);
      }
    }
    Eigen::SparseMatrix<double> jac(m * m, m * m);
    jac.setFromTriplets(trip.begin(), trip.end());
    lu.compute(jac);
    if (lu.info() != Eigen::Success) throw NumericalError("Newton Jacobian is singular on branch " + label);
    const Eigen::VectorXd step = lu.solve(r);
    // Armijo backtracking on the squared residual.
    double alpha = 1.0;
    for (;;) {
      GridField trial = u;
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) trial.value(i, j) -= alpha * step((j - 1) * m + (i - 1));
      Eigen::VectorXd rt = residual_vector(trial, theta);
      const double mt = rt.squaredNorm();
      if (mt <= (1.0 - 1e-4 * alpha) * merit || alpha < 1e-3) {
        u = std::move(trial);
        r = std::move(rt);
        res = r.lpNorm<Eigen::Infinity>();
        merit = mt;
        break;
      }
      alpha *= 0.5;
    }
  }
  if (res < 1e-8) return {label, std::move(u), res, 100};
  throw NumericalError("Newton failed to converge on branch " + label);
}

GridField cold_start(const ProblemDefinition& problem, int n, double theta, int branch) {
  GridField u = boundary_filled(problem, n, 0.0);
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      const double x1 = static_cast<double>(i) / n;
      const double x2 = static_cast<double>(j) / n;
      // Stable starts carry the linearised boundary layer, decay rate sqrt(2) / theta.
      if (branch == 0)
        u.value(i, j) = -1.0 + 2.0 * std::exp(-std::numbers::sqrt2 * std::min(x1, 1.0 - x1) / theta);
      else if (branch == 2)
        u.value(i, j) = 1.0 - 2.0 * std::exp(-std::numbers::sqrt2 * std::min(x2, 1.0 - x2) / theta);
      else
        u.value(i, j) = std::tanh((std::abs(x1 - 0.5) - std::abs(x2 - 0.5)) / (std::numbers::sqrt2 * theta));
    }
  }
  return u;
}

}  // namespace

double allen_cahn_residual(const GridField& u, double theta) {
  return residual_vector(u, theta).lpNorm<Eigen::Infinity>();
}

GridField apply_a1(const GridField& u, double theta) {
  GridField out = u;
  const int n = u.n();
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double v = u.value(i, j);
      if (i == 0 || j == 0 || i == n || j == n)
        out.value(i, j) = -v * v * v / theta;
      else
        out.value(i, j) = -theta * laplacian_h(u, i, j) - v / theta;
    }
  }
  return out;
}

std::vector<CrudeSolution> crude_solutions(const ProblemDefinition& problem, double theta,
                                           int grid_n, std::uint64_t /*seed*/,
                                           const std::vector<CrudeSolution>* warm) {
  if (!problem.split) throw ConfigError("crude solutions need a semi-linear problem");
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  if (grid_n < 4) throw ConfigError("grid_n must be at least 4");

  std::vector<GridField> starts;
  if (warm != nullptr && warm->size() == 3 && (*warm)[0].field.n() == grid_n) {
    for (const auto& w : *warm) starts.push_back(w.field);
  } else {
    for (int b = 0; b < 3; ++b) starts.push_back(cold_start(problem, grid_n, theta, b));
  }
  const char* labels[3] = {"negative_stable", "unstable", "positive_stable"};
  std::vector<CrudeSolution> out;
  for (int s = 0; s < 3; ++s) {
    try {
      out.push_back(newton(starts[static_cast<std::size_t>(s)], theta, labels[s]));
    } catch (const NumericalError&) {
      // Continuation from an anchor theta where the cold start is reliable.
      const double anchor = theta < 0.1 ? 0.1 : theta;
      if (anchor == theta) throw;
      CrudeSolution c = newton(cold_start(problem, grid_n, anchor, s), anchor, labels[s]);
      constexpr int steps = 40;
      for (int k = 1; k <= steps; ++k) {
        const double t = anchor + (theta - anchor) * k / steps;
        c = newton(std::move(c.field), t, labels[s]);
      }
      out.push_back(std::move(c));
    }
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (out[static_cast<std::size_t>(a)].field.l2_distance(out[static_cast<std::size_t>(b)].field) <= 0.1)
        throw NumericalError("crude solutions " + out[static_cast<std::size_t>(a)].label + " and " +
                             out[static_cast<std::size_t>(b)].label + " coincide");
  return out;
}

CrudeSolutionCache::CrudeSolutionCache(ProblemDefinition problem, int grid_n, double resolution)
    : problem_(std::move(problem)), grid_n_(grid_n), resolution_(resolution) {
  if (!(resolution > 0.0)) throw ConfigError("crude solution resolution must be positive");
}

namespace {

bool ordered(const std::vector<CrudeSolution>& s) {
  return s.size() == 3 && s[0].field.mean() < s[1].field.mean() && s[1].field.mean() < s[2].field.mean() &&
         s[0].field.l2_distance(s[1].field) > 0.1 && s[1].field.l2_distance(s[2].field) > 0.1;
}

}  // namespace

double CrudeSolutionCache::snap(double theta) const {
  return std::max(resolution_, std::round(theta / resolution_) * resolution_);
}

const std::vector<CrudeSolution>& CrudeSolutionCache::at(double theta) {
  const long key = std::lround(snap(theta) / resolution_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double t = static_cast<double>(key) * resolution_;
  std::vector<CrudeSolution> sols;
  bool ok = false;
  auto near = cache_.end();
  if (!cache_.empty()) {
    near = cache_.lower_bound(key);
    if (near == cache_.end() || (near != cache_.begin() && key - std::prev(near)->first < near->first - key))
      near = std::prev(near);
    try {
      sols = crude_solutions(problem_, t, grid_n_, 0, &near->second);
      ok = ordered(sols);
    } catch (const NumericalError&) {
      ok = false;
    }
  }
  if (!ok) {
    try {
      sols = crude_solutions(problem_, t, grid_n_);
    } catch (const NumericalError&) {
      if (near == cache_.end()) throw;
      sols = near->second;
    }
  }
  return cache_.emplace(key, std::move(sols)).first->second;
}

std::vector<Eigen::VectorXd> CrudeSolutionCache::a1_means(double theta, const std::vector<Point>& pts) {
  const auto& sols = at(theta);
  const long key = std::lround(snap(theta) / resolution_);
  auto it = a1_cache_.find(key);
  if (it == a1_cache_.end()) {
    const double t = static_cast<double>(key) * resolution_;
    std::vector<GridField> fields;
    for (const auto& s : sols) fields.push_back(apply_a1(s.field, t));
    it = a1_cache_.emplace(key, std::move(fields)).first;
  }
  std::vector<Eigen::VectorXd> out;
  for (const GridField& f : it->second) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) v(static_cast<Eigen::Index>(i)) = f.at(pts[i]);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace probmesh
