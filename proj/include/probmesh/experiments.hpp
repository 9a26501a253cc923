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

#include <string>
#include <vector>

#include "probmesh/config.hpp"
#include "probmesh/design.hpp"
#include "probmesh/inverse.hpp"
#include "probmesh/problems.hpp"

namespace probmesh {

/// Kernel from kernel.family / kernel.scale / kernel.base / kernel.quadrature.
KernelSpec kernel_from_config(const ExperimentConfig& cfg, const Domain& domain);

/// Evenly spread interior points: j / (m + 1) in 1D; in 2D a cols x rows
/// lattice ((i + 1/2) / cols, (j + 1/2) / rows) with cols = floor(sqrt(m)),
/// truncated to m points.
std::vector<Point> uniform_interior(const Domain& domain, int m);

/// Interior points per design.source (uniform | file | optimise) plus the
/// problem's boundary points.
Design design_from_config(const ExperimentConfig& cfg, const ProblemDefinition& problem,
                          const KernelSpec& kernel, int m);

/// Prior from "log_gaussian MEAN SD", "gaussian MEAN SD", "uniform LO HI" or
/// "field N LENGTHSCALE [exp|identity]".
ParameterModel prior_from_string(const std::string& spec);

struct ConvergenceRow {
  int m = 0;
  double l2_error = 0.0;   // Euclidean norm of mu - u over the grid
  double sigma2_l1 = 0.0;  // trapezoid integral of sigma^2 (1D), mean times area (2D)
};

/// Forward solves at each m with uniform designs, scored on `grid_points`
/// evenly spaced points.
std::vector<ConvergenceRow> convergence_study(const ProblemDefinition& problem, const KernelSpec& kernel,
                                              const std::vector<int>& m_list, double theta,
                                              int grid_points = 100);

struct IntervalRow {
  int m = 0;
  std::string method;  // pmm or plugin
  double mean = 0.0;
  double sd = 0.0;
  double mode = 0.0;
};

/// Grid posterior over theta for the PMM and plug-in likelihoods at each m.
std::vector<IntervalRow> inverse_grid_study(const ProblemDefinition& problem, const KernelSpec& kernel,
                                            const ObservationSet& obs, const ParameterModel& prior,
                                            const std::vector<int>& m_list, double lo, double hi,
                                            std::vector<GridPosterior>* posteriors = nullptr);

struct AllenCahnRow {
  int m = 0;
  std::string method;
  double mean = 0.0;
  double sd = 0.0;
  double mode = 0.0;
  double acceptance = 0.0;
  int distinct_indices = 0;
  double iact = 0.0;
  double importance_scale = 0.0;
};

struct AllenCahnResult {
  std::vector<CrudeSolution> crude;
  double lengthscale = 0.0;
  std::vector<AllenCahnRow> rows;
  std::vector<ChainTrace> traces;  // pmm, plugin per m in order
};

/// Histogram mode over [lo, hi] with `bins` bins after discarding the first
/// `burn` fraction; also used for the reported mean and sd.
struct ChainSummary {
  double mean = 0.0;
  double sd = 0.0;
  double mode = 0.0;
  std::vector<double> density;
};
ChainSummary summarise_chain(const std::vector<double>& theta, double lo, double hi, int bins, double burn = 0.1);

/// Each command writes its CSVs into `out_dir` (created if missing) and
/// returns the headline numbers. ConfigError on invalid settings,
/// NumericalError on numerical failure.
std::vector<ConvergenceRow> cmd_forward(const ExperimentConfig& cfg, const std::string& out_dir);
std::vector<IntervalRow> cmd_inverse(const ExperimentConfig& cfg, const std::string& out_dir);
ExchangeResult cmd_design(const ExperimentConfig& cfg, const std::string& out_dir);
AllenCahnResult cmd_allen_cahn(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace probmesh
