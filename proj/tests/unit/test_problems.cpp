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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "probmesh/errors.hpp"
#include "probmesh/problems.hpp"

namespace probmesh {
namespace {

double second_difference(const std::function<double(Point, double)>& u, double x, double theta) {
  const double h = 1e-4;
  return (u({x + h}, theta) - 2.0 * u({x}, theta) + u({x - h}, theta)) / (h * h);
}

TEST(Poisson1D, ExactSolution) {
  const ProblemDefinition p = poisson_1d();
  ASSERT_TRUE(p.has_exact());
  EXPECT_EQ(p.exact_solution({0.0}, 1.0), 0.0);
  EXPECT_NEAR(p.exact_solution({1.0}, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(p.exact_solution({0.25}, 1.0), 0.0253303, 1e-7);
  EXPECT_EQ(p.solution_count, 1);
}

TEST(Poisson1D, FiniteDifferenceResidual) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (const ProblemDefinition& p : {poisson_1d(), parametric_poisson_1d()})
    for (double theta : {1.0, 0.5, 3.0}) {
      if (!p.theta_dependent && theta != 1.0) continue;
      for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        EXPECT_NEAR(theta * second_difference(p.exact_solution, x, theta), p.forcing({x}), 1e-6) << p.name;
      }
    }
}

TEST(ParametricPoisson1D, ThetaScaling) {
  const ProblemDefinition p = parametric_poisson_1d();
  const ProblemDefinition q = poisson_1d();
  for (double x : {0.1, 0.25, 0.6}) {
    EXPECT_DOUBLE_EQ(p.exact_solution({x}, 1.0), q.exact_solution({x}, 1.0));
    EXPECT_DOUBLE_EQ(p.exact_solution({x}, 2.0), 0.5 * p.exact_solution({x}, 1.0));
  }
  EXPECT_THROW(p.exact_solution({0.3}, 0.0), DomainError);
  EXPECT_THROW(p.exact_solution({0.3}, -1.0), DomainError);
}

TEST(Problems, LookupByName) {
  EXPECT_EQ(problem_by_name("poisson_1d").name, "poisson_1d");
  EXPECT_EQ(problem_by_name("allen_cahn_2d").solution_count, 3);
  EXPECT_THROW(problem_by_name("heat"), ConfigError);
}

TEST(AllenCahn, SplitInverse) {
  const ProblemDefinition p = allen_cahn_2d();
  ASSERT_TRUE(p.split.has_value());
  EXPECT_FALSE(p.has_exact());
  for (double theta : {0.04, 0.1})
    for (double u : {-1.5, -1.0, 0.0, 1.0, 2.0})
      EXPECT_NEAR(p.split->a2_inverse(p.split->a2(u, theta), theta), u, 1e-12);
}

TEST(AllenCahn, ConstantFieldsSolveInteriorEquation) {
  for (double c : {-1.0, 1.0}) {
    GridField f(10, std::vector<double>(121, c));
    EXPECT_NEAR(allen_cahn_residual(f, 0.04), 0.0, 1e-12);
  }
}

TEST(AllenCahn, BoundaryDesignExcludesCorners) {
  const ProblemDefinition p = allen_cahn_2d();
  const std::vector<Point> b = p.boundary_design(5);
  EXPECT_EQ(b.size(), 20u);
  for (const Point& q : b) {
    const bool corner = (q.x == 0.0 || q.x == 1.0) && (q.y == 0.0 || q.y == 1.0);
    EXPECT_FALSE(corner);
    EXPECT_TRUE(p.domain.on_boundary(q));
    EXPECT_EQ(p.boundary(q), (q.x == 0.0 || q.x == 1.0) ? 1.0 : -1.0);
  }
}

TEST(CrudeSolutions, ThreeBranchesInLayerRegime) {
  const ProblemDefinition p = allen_cahn_2d();
  const auto s = crude_solutions(p, 0.04, 20);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].label, "negative_stable");
  EXPECT_EQ(s[1].label, "unstable");
  EXPECT_EQ(s[2].label, "positive_stable");
  for (const CrudeSolution& c : s) {
    EXPECT_LT(allen_cahn_residual(c.field, 0.04), 1e-6) << c.label;
    EXPECT_LT(c.residual, 1e-8) << c.label;
  }
  EXPECT_LT(s[0].field.mean(), 0.0);
  EXPECT_GT(s[2].field.mean(), 0.0);
  const int n = s[2].field.n();
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) {
      EXPECT_GT(s[2].field.value(i, j), -1.0);
      EXPECT_LE(s[2].field.value(i, j), 1.0);
    }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) EXPECT_GT(s[a].field.l2_distance(s[b].field), 0.1);
}

TEST(CrudeSolutions, Deterministic) {
  const ProblemDefinition p = allen_cahn_2d();
  const auto a = crude_solutions(p, 0.07, 16, 3);
  const auto b = crude_solutions(p, 0.07, 16, 3);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a[i].field.values(), b[i].field.values());
}

TEST(CrudeSolutions, RejectsLinearProblem) {
  EXPECT_THROW(crude_solutions(poisson_1d(), 0.04, 20), ConfigError);
  EXPECT_THROW(crude_solutions(allen_cahn_2d(), -0.1, 20), DomainError);
}

TEST(CrudeSolutions, BoundaryValuesHeld) {
  const auto s = crude_solutions(allen_cahn_2d(), 0.06, 12);
  for (const CrudeSolution& c : s)
    for (int k = 1; k < 12; ++k) {
      EXPECT_EQ(c.field.value(0, k), 1.0);
      EXPECT_EQ(c.field.value(12, k), 1.0);
      EXPECT_EQ(c.field.value(k, 0), -1.0);
      EXPECT_EQ(c.field.value(k, 12), -1.0);
    }
}

TEST(CrudeSolutionCache, SnapsToLattice) {
  CrudeSolutionCache cache(allen_cahn_2d(), 16, 1e-3);
  EXPECT_DOUBLE_EQ(cache.snap(0.04012), 0.040);
  EXPECT_DOUBLE_EQ(cache.snap(0.0406), 0.041);
  const auto& a = cache.at(0.0501);
  const auto& b = cache.at(0.0499);
  EXPECT_EQ(a[1].field.values(), b[1].field.values());
  const std::vector<Point> pts = {{0.3, 0.4}, {0.5, 0.5}};
  const auto means = cache.a1_means(0.05, pts);
  ASSERT_EQ(means.size(), 3u);
  for (const auto& v : means) EXPECT_EQ(v.size(), 2);
}

TEST(GridField, InterpolationAndDistance) {
  std::vector<double> v(9);
  for (int j = 0; j <= 2; ++j)
    for (int i = 0; i <= 2; ++i) v[static_cast<std::size_t>(j * 3 + i)] = i * 0.5 + j;
  const GridField f(2, v);
  EXPECT_NEAR(f.at({0.25, 0.75}), 0.25 + 2.0 * 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(f.l2_distance(f), 0.0);
  EXPECT_THROW(GridField(2, std::vector<double>(5)), DomainError);
}

}  // namespace
}  // namespace probmesh
