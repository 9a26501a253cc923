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
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "probmesh/collocation.hpp"
#include "probmesh/kernels.hpp"
#include "probmesh/problems.hpp"

namespace probmesh {

/// y | u ~ N(u(X), Gamma).
struct ObservationSet {
  std::vector<Point> locations;
  Eigen::VectorXd values;
  Eigen::MatrixXd noise_cov;

  static ObservationSet isotropic(std::vector<Point> locations, Eigen::VectorXd values, double gamma);
  std::size_t size() const { return locations.size(); }
  void validate(const Domain& domain) const;
};

/// log N(y; mean, cov). Throws NumericalError when cov is not positive definite.
double gaussian_log_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& cov);

/// log N(y; mu(X), Sigma(X) + Gamma).
double marginal_log_likelihood(const CollocationPosterior& p, const ObservationSet& obs);
double marginal_log_likelihood(const CollocationPosterior& p, const EvaluationCache& cache,
                               const ObservationSet& obs);

/// log N(y; mu(X), Gamma).
double plug_in_log_likelihood(const CollocationPosterior& p, const ObservationSet& obs);
double plug_in_log_likelihood(const CollocationPosterior& p, const EvaluationCache& cache,
                              const ObservationSet& obs);

/// Prior on a scalar parameter or a field over grid points.
class ParameterModel {
 public:
  enum class Kind { Gaussian, LogGaussian, Uniform, Field };
  enum class Transform { Identity, Exp };

  static ParameterModel gaussian(double mean, double sd);
  static ParameterModel log_gaussian(double mean, double sd);
  static ParameterModel uniform(double lo, double hi);
  /// Field prior: w ~ N(0, C) with C = k(grid, grid); theta(x) = T(w(x)).
  static ParameterModel field(std::vector<double> grid, const KernelSpec& cov, Transform transform);

  Kind kind() const { return kind_; }
  bool gaussian_reference() const { return kind_ != Kind::Uniform; }
  int dimension() const;
  double a() const { return a_; }
  double b() const { return b_; }

  /// Log density of a scalar value (up to a constant for Uniform).
  double log_prior(double theta) const;
  bool in_support(double theta) const;

  /// Map a whitened reference vector w ~ N(0, I) to the physical parameter.
  Eigen::VectorXd to_physical(const Eigen::VectorXd& w) const;
  /// Field grid and its parameter for given physical values.
  Parameter to_parameter(const Eigen::VectorXd& physical) const;
  const std::vector<double>& grid() const { return grid_; }

 private:
  Kind kind_ = Kind::Gaussian;
  double a_ = 0.0;
  double b_ = 1.0;
  std::vector<double> grid_;
  Eigen::MatrixXd chol_;
  Transform transform_ = Transform::Identity;
};

struct ChainTrace {
  std::vector<double> theta;
  std::vector<Eigen::VectorXd> states;  // pCN: physical parameter per iteration
  std::vector<double> log_like;
  std::vector<bool> accepted;
  std::vector<int> solution_index;      // empty when not sampled
  std::vector<double> lengthscale;      // empty when not sampled
  std::uint64_t seed = 0;

  std::size_t size() const { return log_like.size(); }
  double acceptance_rate() const;
};

/// pCN on the whitened prior reference. `potential` receives the physical
/// parameter and returns Phi = -log likelihood (may be +inf).
ChainTrace pcn_sample(const ParameterModel& model,
                      const std::function<double(const Eigen::VectorXd&)>& potential, double lambda,
                      int iters, std::uint64_t seed,
                      std::optional<Eigen::VectorXd> initial_reference = std::nullopt);

/// Random-walk Metropolis on a scalar with symmetric Gaussian proposals.
ChainTrace random_walk_metropolis(const std::function<double(double)>& log_target, double initial,
                                  double proposal_sd, int iters, std::uint64_t seed);

/// Unbiased positive estimator of a likelihood, returned on the log scale.
class LikelihoodEstimator {
 public:
  virtual ~LikelihoodEstimator() = default;
  virtual int solution_count() const { return 1; }
  /// log of the estimate; -inf when every importance draw was rejected.
  virtual double log_estimate(double theta, int solution_index, double lengthscale,
                              std::mt19937_64& rng) = 0;
};

/// Wraps a deterministic log-likelihood as a zero-variance estimator.
class ExactEstimator : public LikelihoodEstimator {
 public:
  explicit ExactEstimator(std::function<double(double)> log_like, int solutions = 1)
      : log_like_(std::move(log_like)), solutions_(solutions) {}
  int solution_count() const override { return solutions_; }
  double log_estimate(double theta, int, double, std::mt19937_64&) override { return log_like_(theta); }

 private:
  std::function<double(double)> log_like_;
  int solutions_;
};

/// Gaussian conditional for the semi-linear system L = [A1; I; B] with data
/// [z; A2^{-1}(g - z); b]. nullopt when A2^{-1} is undefined at some input.
std::optional<CollocationPosterior> semi_linear_posterior(const KernelSpec& kernel,
                                                          const OperatorSet& operators,
                                                          const Design& design,
                                                          const Eigen::VectorXd& g,
                                                          const Eigen::VectorXd& b,
                                                          const Eigen::VectorXd& z,
                                                          const Parameter& theta,
                                                          const SemiLinearSplit& split);

/// Importance-sampling estimator for semi-linear problems. For each draw
/// z ~ N(m_i(theta), c^2 I) the inner Gaussian integral over u is closed
/// form; the estimate is the average of N(y; mu(z), Sigma + Gamma) / r(z).
/// With `plug_in` set the latent state is fixed at m_i and Sigma dropped.
class SemiLinearEstimator : public LikelihoodEstimator {
 public:
  struct Options {
    int n_importance = 500;
    double importance_scale = 10.0;
    bool plug_in = false;
    /// Shift and reshape r by one Gauss-Newton step towards the data: the
    /// map z -> mu(z) is linearised at the crude mean and combined with
    /// N(m_i, c^2 I). Off gives the plain N(m_i, c^2 I) density.
    bool adapt = true;
    /// Scale applied to the adapted covariance (heavier than the target).
    double inflate = 1.2;
    /// Gauss-Newton iterations used to place the adapted density.
    int adapt_steps = 5;
  };
  /// Importance means per solution index, evaluated at the interior design points.
  using MeanProvider = std::function<std::vector<Eigen::VectorXd>(double theta)>;

  SemiLinearEstimator(ProblemDefinition problem, KernelSpec kernel, Design design,
                      ObservationSet obs, MeanProvider means, Options options);

  int solution_count() const override { return solution_count_; }
  double log_estimate(double theta, int solution_index, double lengthscale,
                      std::mt19937_64& rng) override;

  /// Fraction of draws with non-negligible weight (pilot diagnostic): the
  /// effective sample size of the importance weights over n_importance.
  double ess_fraction(double theta, int solution_index, double lengthscale, std::mt19937_64& rng);

  void set_importance_scale(double c) { options_.importance_scale = c; }
  const Options& options() const { return options_; }

 private:
  struct Prepared {
    Eigen::MatrixXd w;              // mu(X) = w * data
    Eigen::LLT<Eigen::MatrixXd> s;  // Sigma + Gamma (or Gamma for plug-in)
    double log_det_s = 0.0;
    Eigen::Index m = 0;  // interior block size
  };
  struct Proposal {
    Eigen::VectorXd mean;
    Eigen::MatrixXd root;  // z = mean + root * xi
    double log_det_root = 0.0;
  };
  Proposal proposal(const Prepared& prep, double theta, const Eigen::VectorXd& centre) const;
  Eigen::VectorXd data_for(const Eigen::VectorXd& z, double theta, bool* rejected) const;
  const Prepared& prepare(double theta, double lengthscale);
  Eigen::VectorXd log_weights(double theta, int solution_index, double lengthscale,
                              std::mt19937_64& rng);

  ProblemDefinition problem_;
  KernelSpec kernel_;
  Design design_;
  ObservationSet obs_;
  MeanProvider means_;
  Options options_;
  int solution_count_ = 1;
  Eigen::VectorXd b_;
  Eigen::VectorXd g_;
  std::map<double, std::shared_ptr<CollocationModel>> models_;
  std::map<std::pair<double, double>, Prepared> prepared_;
};

/// Pilot tuning of the importance scale: for each c in `ladder` the sd of
/// `repeats` log-estimates is averaged over solution indices; the c with the
/// smallest average is set on the estimator and returned. Any -inf estimate
/// disqualifies a rung.
double tune_importance_scale(SemiLinearEstimator& estimator, double theta, double lengthscale,
                             const std::vector<double>& ladder, int repeats, std::uint64_t seed);

struct LengthscaleOptions {
  bool sample = false;     // false: fixed at `initial`
  double initial = 0.2;
  double scale = 1.0;      // half-Cauchy scale
  double proposal_sd = 0.1;  // random walk on log ell
};

struct PseudoMarginalOptions {
  double initial_theta = 1.0;
  double proposal_sd = 0.1;
  int iters = 1000;
  std::uint64_t seed = 1;
  LengthscaleOptions lengthscale;
};

/// Metropolis-Hastings on (theta, i[, ell]) with estimated likelihoods; the
/// current estimate is retained on rejection.
ChainTrace pseudo_marginal_mcmc(LikelihoodEstimator& estimator, const ParameterModel& prior,
                                const PseudoMarginalOptions& options);

/// log density of the half-Cauchy(scale) distribution at ell > 0.
double half_cauchy_log_density(double ell, double scale);

struct CalibrationResult {
  double best = 0.0;
  double best_log_like = 0.0;
  std::vector<double> grid;
  std::vector<double> surface;  // -inf where evaluation failed
};

/// Argmax of `log_like` over the grid, refined by golden-section search
/// between the best grid point's neighbours.
CalibrationResult calibrate_empirical_bayes(const std::function<double(double)>& log_like,
                                            std::vector<double> grid);

struct GridPosterior {
  std::vector<double> theta;
  std::vector<double> density;  // normalised by the trapezoid rule
  double mean = 0.0;
  double sd = 0.0;
  double mode = 0.0;
};

/// Posterior over a sorted theta grid from log likelihood + log prior values.
GridPosterior grid_posterior(std::vector<double> theta, const std::vector<double>& log_post);

/// Posterior on a coarse log grid refined to `fine` linear points over the
/// region carrying the mass.
GridPosterior adaptive_grid_posterior(const std::function<double(double)>& log_post, double lo,
                                      double hi, int coarse = 100, int fine = 400);

/// Trace CSV: iter,theta,loglike,accepted,solution_index,lengthscale.
void write_trace_csv(const std::string& path, const ChainTrace& trace);
/// Sidecar with the seed and summary statistics.
void write_trace_meta(const std::string& path, const ChainTrace& trace);

/// Integrated autocorrelation time (initial positive sequence estimator).
double integrated_autocorrelation_time(const std::vector<double>& x);

}  // namespace probmesh
