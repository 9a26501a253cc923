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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "probmesh/collocation.hpp"
#include "probmesh/geometry.hpp"
#include "probmesh/operators.hpp"

namespace probmesh {

/// Semi-linear split A = A1 + A2 with A2 a pointwise monotone map.
struct SemiLinearSplit {
  OperatorDescriptor a1;
  std::function<double(double u, double theta)> a2;
  /// Inverse of a2 in u; NaN where undefined.
  std::function<double(double v, double theta)> a2_inverse;
};

struct ProblemDefinition {
  std::string name;
  Domain domain = Domain::unit_interval();
  /// Linear problems: the interior operator. Semi-linear problems: A1.
  OperatorDescriptor interior;
  std::function<double(Point)> forcing;
  std::function<double(Point)> boundary;
  /// u(x; theta) when known in closed form.
  std::function<double(Point, double)> exact_solution;
  std::optional<SemiLinearSplit> split;
  int solution_count = 1;
  bool theta_dependent = false;

  bool has_exact() const { return static_cast<bool>(exact_solution); }
  OperatorSet operator_set() const;
  /// g at the interior design points and b at the boundary points.
  Eigen::VectorXd forcing_at(const std::vector<Point>& pts) const;
  Eigen::VectorXd boundary_at(const std::vector<Point>& pts) const;
  /// Boundary sample points used for designs (box corners excluded).
  std::vector<Point> boundary_design(int per_edge) const;
};

/// u'' = g on (0, 1), g = -sin(2 pi x), u(0) = u(1) = 0,
/// u = (2 pi)^-2 sin(2 pi x).
ProblemDefinition poisson_1d();

/// theta u'' = g with the same forcing; u = theta^-1 (2 pi)^-2 sin(2 pi x).
ProblemDefinition parametric_poisson_1d();

/// -theta Lap u + theta^-1 (u^3 - u) = 0 on (0, 1)^2, u = +1 on x1 in {0, 1},
/// u = -1 on x2 in {0, 1}. A1 = -theta Lap - theta^-1 I, A2 u = theta^-1 u^3.
ProblemDefinition allen_cahn_2d();

/// Looks a built-in up by name; ConfigError when unknown.
ProblemDefinition problem_by_name(const std::string& name);

/// Node values on a (n + 1) x (n + 1) grid over the unit square, h = 1 / n,
/// boundary nodes included. Row-major in x2, i.e. value(i, j) at (i h, j h).
class GridField {
 public:
  GridField() = default;
  GridField(int n, std::vector<double> values);

  int n() const { return n_; }
  double h() const { return 1.0 / n_; }
  double value(int i, int j) const { return values_[static_cast<std::size_t>(j) * (n_ + 1) + i]; }
  double& value(int i, int j) { return values_[static_cast<std::size_t>(j) * (n_ + 1) + i]; }
  const std::vector<double>& values() const { return values_; }

  /// Bilinear interpolation; points are clamped into the unit square.
  double at(Point p) const;
  double mean() const;
  /// Root-mean-square difference over all nodes (grid L2 distance).
  double l2_distance(const GridField& other) const;

 private:
  int n_ = 0;
  std::vector<double> values_;
};

struct CrudeSolution {
  std::string label;  // negative_stable, unstable, positive_stable
  GridField field;
  double residual = 0.0;
  int iterations = 0;
};

/// Three Newton solutions of the finite-difference Allen-Cahn system at
/// theta. Cold starts are u = -1 and u = +1 with linearised boundary layers
/// and a tanh saddle profile; a failed cold start is retried by continuation
/// from theta = 0.1. `seed` is accepted for interface stability; the starts
/// are deterministic. `warm` optionally supplies start fields (same order).
std::vector<CrudeSolution> crude_solutions(const ProblemDefinition& problem, double theta,
                                           int grid_n, std::uint64_t seed = 0,
                                           const std::vector<CrudeSolution>* warm = nullptr);

/// max-norm of -theta Lap_h u + theta^-1 (u^3 - u) over interior nodes.
double allen_cahn_residual(const GridField& u, double theta);

/// (A1 u)_h = -theta Lap_h u - theta^-1 u at interior nodes; on boundary
/// nodes the pointwise identity A1 u = -A2 u = -theta^-1 u^3 is used.
GridField apply_a1(const GridField& u, double theta);

/// Crude solutions on a theta lattice of spacing `resolution`: a query is
/// snapped to the nearest lattice value, so the result is a fixed function of
/// theta. New lattice values are warm-started from the nearest computed one
/// (checked for branch ordering, else cold-started); when every start fails
/// the nearest computed solutions are reused.
class CrudeSolutionCache {
 public:
  CrudeSolutionCache(ProblemDefinition problem, int grid_n, double resolution = 1e-3);

  const std::vector<CrudeSolution>& at(double theta);
  /// Finite-difference A1 u_i interpolated at `pts`, one vector per branch,
  /// evaluated at the snapped theta.
  std::vector<Eigen::VectorXd> a1_means(double theta, const std::vector<Point>& pts);
  int grid_n() const { return grid_n_; }
  double snap(double theta) const;

 private:
  ProblemDefinition problem_;
  int grid_n_;
  double resolution_;
  std::map<long, std::vector<CrudeSolution>> cache_;
  std::map<long, std::vector<GridField>> a1_cache_;
};

}  // namespace probmesh
