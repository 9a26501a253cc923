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
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "probmesh/geometry.hpp"
#include "probmesh/kernels.hpp"
#include "probmesh/operators.hpp"

namespace probmesh {

/// Interior collocation points and boundary points.
struct Design {
  std::vector<Point> interior;
  std::vector<Point> boundary;

  std::size_t size() const { return interior.size() + boundary.size(); }
  std::vector<Point> all_points() const;
  /// Throws DomainError on points outside D / off the boundary, or on
  /// duplicates closer than 1e-12.
  void validate(const Domain& domain) const;
};

/// Interior operator, boundary operator, and (for semi-linear problems) an
/// extra identity block observed at the interior points.
struct OperatorSet {
  OperatorDescriptor interior = OperatorDescriptor::laplacian();
  OperatorDescriptor boundary = OperatorDescriptor::boundary_trace();
  bool identity_block = false;

  static OperatorSet linear(OperatorDescriptor a) { return {std::move(a), OperatorDescriptor::boundary_trace(), false}; }
  static OperatorSet semi_linear(OperatorDescriptor a1) { return {std::move(a1), OperatorDescriptor::boundary_trace(), true}; }
};

/// One row-block of the collocation system: an operator observed at points.
struct CollocationBlock {
  OperatorDescriptor op;
  LinearForm form;
  std::vector<Point> points;
};

class CollocationPosterior;
class CollocationModel;

/// Operator-applied kernel columns against a fixed set of evaluation points,
/// cached so that conditioning at many theta values reuses them.
class EvaluationCache {
 public:
  const std::vector<Point>& points() const { return points_; }
  const OperatorDescriptor& output() const { return output_; }

 private:
  friend class CollocationModel;
  friend class CollocationPosterior;
  std::vector<Point> points_;
  OperatorDescriptor output_;
  LinearForm form_;
  // cross_[block][k]: D_{out order, block order}(points, block points)
  struct Term {
    int out_order;
    int block_order;
    Eigen::MatrixXd d;
  };
  std::vector<std::vector<Term>> cross_;
  std::vector<std::pair<std::pair<int, int>, Eigen::VectorXd>> prior_diag_;
  std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>> prior_full_;
};

/// Symmetric-collocation system for a fixed kernel, operator set and design.
/// The theta-independent derivative blocks are computed once.
class CollocationModel {
 public:
  CollocationModel(KernelSpec kernel, OperatorSet operators, Design design);

  const KernelSpec& kernel() const;
  const OperatorSet& operators() const;
  const Design& design() const;
  const std::vector<CollocationBlock>& blocks() const;
  std::size_t size() const;

  /// L Lbar K(X0) at theta (no jitter).
  Eigen::MatrixXd gram(const Parameter& theta) const;

  /// Factorise the Gram matrix at theta and solve against `data`. A zero
  /// `jitter` starts the escalation at 1e-12 trace / n.
  CollocationPosterior condition(const Parameter& theta, const Eigen::VectorXd& data,
                                 double jitter = 0.0) const;

  /// Precompute cross terms against `points` for the output operator.
  /// `full_prior` also stores the prior block needed for full covariances.
  EvaluationCache evaluation(std::span<const Point> points,
                             const OperatorDescriptor& output = OperatorDescriptor::identity(),
                             bool full_prior = true) const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
  friend class CollocationPosterior;
};

/// Gaussian conditional measure over the solution.
class CollocationPosterior {
 public:
  const Parameter& theta() const { return theta_; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::LLT<Eigen::MatrixXd>& factor() const { return factor_; }
  const Eigen::VectorXd& data() const { return data_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const CollocationModel& model() const { return model_; }

  /// Same factorisation, different data vector.
  CollocationPosterior with_data(const Eigen::VectorXd& data) const;

  /// C(X, X0) = L_out Lbar K(X, X0).
  Eigen::MatrixXd cross(const EvaluationCache& cache) const;
  Eigen::MatrixXd cross(std::span<const Point> points,
                        const OperatorDescriptor& output = OperatorDescriptor::identity()) const;

  Eigen::VectorXd mean(const EvaluationCache& cache) const;
  Eigen::VectorXd mean(std::span<const Point> points,
                       const OperatorDescriptor& output = OperatorDescriptor::identity()) const;

  Eigen::MatrixXd cov(const EvaluationCache& cache) const;
  Eigen::MatrixXd cov(std::span<const Point> points) const;

  /// Pointwise variance, clamped at zero within -1e-10 max(1, k(x, x)).
  Eigen::VectorXd variance(const EvaluationCache& cache) const;
  Eigen::VectorXd variance(std::span<const Point> points) const;

  /// Prior (unconditioned) covariance of the output functional.
  Eigen::MatrixXd prior_cov(const EvaluationCache& cache) const;
  Eigen::VectorXd prior_variance(const EvaluationCache& cache) const;

  /// `count` draws from N(mu(X), Sigma(X)); one sample path per row.
  Eigen::MatrixXd sample(std::span<const Point> points, std::uint64_t seed, int count) const;

  /// G^{-1} M via the retained factor.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& m) const;

 private:
  friend class CollocationModel;
  CollocationPosterior(CollocationModel model, Parameter theta) : model_(std::move(model)), theta_(std::move(theta)) {}

  double kernel_scale() const;
  Eigen::VectorXd clamp_variance(Eigen::VectorXd var, const Eigen::VectorXd& prior) const;

  CollocationModel model_;
  Parameter theta_;
  double jitter_ = 0.0;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::VectorXd data_;
  Eigen::VectorXd weights_;
};

/// Convenience: linear system with data [g; b].
CollocationPosterior assemble(const KernelSpec& kernel, const OperatorSet& operators,
                              const Design& design, const Eigen::VectorXd& g,
                              const Eigen::VectorXd& b, const Parameter& theta,
                              double jitter = 0.0);

/// max over grid of the distance to the nearest design point.
double fill_distance(const Design& design, std::span<const Point> candidate_grid);

/// Default fill-distance grid: 10^4 points in 1D, 100 x 100 in 2D.
std::vector<Point> fill_distance_grid(const Domain& domain);

struct ErrorBoundReport {
  double max_violation = 0.0;  // max(0, |mu - u0| - sigma ||u0||)
  int violations = 0;          // points with violation > 1e-8
  double norm = 0.0;           // ||u0|| in the native space
  double max_error = 0.0;      // max |mu - u0|
};

/// Checks |mu(x) - u0(x)| <= sigma(x) ||u0|| for u0 = sum_j c_j k(., r_j),
/// after conditioning the posterior's design on the data u0 induces.
ErrorBoundReport local_error_bound_check(const CollocationPosterior& p,
                                         const Eigen::VectorXd& coefficients,
                                         std::span<const Point> rep_points,
                                         std::span<const Point> test_points);

}  // namespace probmesh
