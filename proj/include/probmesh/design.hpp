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
#include <random>
#include <string>
#include <vector>

#include "probmesh/collocation.hpp"
#include "probmesh/kernels.hpp"

namespace probmesh {

enum class DesignLoss { AOptimal, DOptimal };

/// Scores designs by the posterior covariance at fixed evaluation points.
/// Interior points move; boundary points stay fixed.
class DesignProblem {
 public:
  /// Empty `evaluation_points` selects the default grid: 100 points in 1D,
  /// 20 x 20 in 2D (disc: the nodes of that grid inside the disc).
  DesignProblem(KernelSpec kernel, OperatorSet operators, Domain domain, DesignLoss loss,
                std::vector<Point> evaluation_points = {});

  const KernelSpec& kernel() const { return kernel_; }
  const OperatorSet& operators() const { return operators_; }
  const Domain& domain() const { return domain_; }
  DesignLoss loss() const { return loss_; }
  const std::vector<Point>& evaluation_points() const { return evaluation_points_; }

  static std::vector<Point> default_evaluation_points(const Domain& domain);

 private:
  KernelSpec kernel_;
  OperatorSet operators_;
  Domain domain_;
  DesignLoss loss_;
  std::vector<Point> evaluation_points_;
};

/// A-optimal: mean posterior variance over the evaluation points.
/// D-optimal: log det of the posterior covariance there, eigenvalues floored
/// at 1e-14 times the largest. +inf for invalid or ill-conditioned designs.
double design_loss(const DesignProblem& problem, const Design& design, const Parameter& theta);

struct ExchangeOptions {
  int sweeps = 3;
  int candidates_per_coord = 16;
  std::uint64_t seed = 1;
  /// Golden-section iterations around the best candidate.
  int refine_iterations = 20;
  /// Worker threads for candidate scans; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

struct ExchangeResult {
  Design design;
  std::vector<double> loss_trace;  // entry 0 is the initial loss, then one per sweep
  double initial_loss() const { return loss_trace.front(); }
  double final_loss() const { return loss_trace.back(); }
};

/// Coordinate exchange: each sweep visits the interior points in sorted
/// order and each of their coordinates, scans a shifted candidate grid along
/// the admissible range, refines around the best candidate, and moves only
/// on strict improvement.
ExchangeResult coordinate_exchange(const DesignProblem& problem, const Design& initial,
                                   const Parameter& theta, const ExchangeOptions& options = {});

/// Local search from a previous optimum at a new theta.
ExchangeResult warm_start_redesign(const DesignProblem& problem, const Design& previous,
                                   const Parameter& theta_new, int light_sweeps,
                                   ExchangeOptions options = {});

/// `m` interior points drawn uniformly inside the domain.
std::vector<Point> random_interior(const Domain& domain, int m, std::mt19937_64& rng);

/// Smallest pairwise distance between interior points (+inf below two points).
double min_separation(const std::vector<Point>& points);

/// CSV with header x1[,x2],role and role in {interior, boundary}.
void write_design_csv(const std::string& path, const Design& design, int dim);
Design read_design_csv(const std::string& path);

}  // namespace probmesh
