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

#include "probmesh/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "probmesh/errors.hpp"

namespace probmesh {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Fixed stream offsets so that theta, lengthscale, solution-index and
// estimator draws never share a generator.
constexpr std::uint64_t kLengthscaleStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kIndexStream = 0xBF58476D1CE4E5B9ULL;
constexpr std::uint64_t kEstimatorStream = 0x94D049BB133111EBULL;

}  // namespace

ObservationSet ObservationSet::isotropic(std::vector<Point> locations, Eigen::VectorXd values,
                                         double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("observation noise gamma must be positive");
  if (values.size() != static_cast<Eigen::Index>(locations.size()))
    throw ConfigError("one observation value per location required");
  ObservationSet o;
  const Eigen::Index n = values.size();
  o.locations = std::move(locations);
  o.values = std::move(values);
  o.noise_cov = gamma * gamma * Eigen::MatrixXd::Identity(n, n);
  return o;
}

void ObservationSet::validate(const Domain& domain) const {
  const Eigen::Index n = static_cast<Eigen::Index>(locations.size());
  if (values.size() != n || noise_cov.rows() != n || noise_cov.cols() != n)
    throw ConfigError("observation set dimensions disagree");
  for (const Point& p : locations)
    if (!domain.contains_closure(p)) throw DomainError("observation location outside the domain");
  Eigen::LLT<Eigen::MatrixXd> llt(noise_cov);
  if (llt.info() != Eigen::Success) throw ConfigError("observation noise covariance is not positive definite");
}

double gaussian_log_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& cov) {
  const Eigen::Index n = y.size();
  if (mean.size() != n || cov.rows() != n || cov.cols() != n)
    throw DomainError("gaussian_log_density: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "covariance not positive definite (eigenvalue range " << es.eigenvalues().minCoeff()
       << " .. " << es.eigenvalues().maxCoeff() << ")";
    throw NumericalError(os.str());
  }
  const Eigen::VectorXd r = llt.matrixL().solve(y - mean);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * r.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
}

double marginal_log_likelihood(const CollocationPosterior& p, const EvaluationCache& cache,
                               const ObservationSet& obs) {
  return gaussian_log_density(obs.values, p.mean(cache), p.cov(cache) + obs.noise_cov);
}

double marginal_log_likelihood(const CollocationPosterior& p, const ObservationSet& obs) {
  return marginal_log_likelihood(p, p.model().evaluation(obs.locations), obs);
}

double plug_in_log_likelihood(const CollocationPosterior& p, const EvaluationCache& cache,
                              const ObservationSet& obs) {
  return gaussian_log_density(obs.values, p.mean(cache), obs.noise_cov);
}

double plug_in_log_likelihood(const CollocationPosterior& p, const ObservationSet& obs) {
  return plug_in_log_likelihood(p, p.model().evaluation(obs.locations, OperatorDescriptor::identity(), false), obs);
}

// ---------------------------------------------------------------------------

ParameterModel ParameterModel::gaussian(double mean, double sd) {
  if (!(sd > 0.0)) throw ConfigError("prior sd must be positive");
  ParameterModel m;
  m.kind_ = Kind::Gaussian;
  m.a_ = mean;
  m.b_ = sd;
  return m;
}

ParameterModel ParameterModel::log_gaussian(double mean, double sd) {
  ParameterModel m = gaussian(mean, sd);
  m.kind_ = Kind::LogGaussian;
  return m;
}

ParameterModel ParameterModel::uniform(double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("uniform prior needs lo < hi");
  ParameterModel m;
  m.kind_ = Kind::Uniform;
  m.a_ = lo;
  m.b_ = hi;
  return m;
}

ParameterModel ParameterModel::field(std::vector<double> grid, const KernelSpec& cov,
                                     Transform transform) {
  if (grid.size() < 2) throw ConfigError("field prior needs at least two grid points");
  std::vector<Point> pts;
  for (double g : grid) pts.push_back({g, 0.0});
  Eigen::MatrixXd c = gram_matrix(cov, pts);
  c.diagonal().array() += 1e-10 * c.trace() / static_cast<double>(c.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw ConfigError("field prior covariance is not positive definite");
  ParameterModel m;
  m.kind_ = Kind::Field;
  m.grid_ = std::move(grid);
  m.chol_ = llt.matrixL();
  m.transform_ = transform;
  return m;
}

int ParameterModel::dimension() const {
  return kind_ == Kind::Field ? static_cast<int>(grid_.size()) : 1;
}

bool ParameterModel::in_support(double theta) const {
  switch (kind_) {
    case Kind::Uniform:
      return theta > a_ && theta < b_;
    case Kind::LogGaussian:
      return theta > 0.0;
    default:
      return std::isfinite(theta);
  }
}

double ParameterModel::log_prior(double theta) const {
  if (!in_support(theta)) return kNegInf;
  switch (kind_) {
    case Kind::Gaussian: {
      const double z = (theta - a_) / b_;
      return -0.5 * z * z - std::log(b_) - 0.5 * kLog2Pi;
    }
    case Kind::LogGaussian: {
      const double z = (std::log(theta) - a_) / b_;
      return -0.5 * z * z - std::log(b_ * theta) - 0.5 * kLog2Pi;
    }
    case Kind::Uniform:
      return -std::log(b_ - a_);
    case Kind::Field:
      throw ConfigError("log_prior is defined for scalar parameters only");
  }
  return kNegInf;
}

Eigen::VectorXd ParameterModel::to_physical(const Eigen::VectorXd& w) const {
  switch (kind_) {
    case Kind::Gaussian:
      return Eigen::VectorXd::Constant(1, a_ + b_ * w(0));
    case Kind::LogGaussian:
      return Eigen::VectorXd::Constant(1, std::exp(a_ + b_ * w(0)));
    case Kind::Field: {
      Eigen::VectorXd v = chol_ * w;
      if (transform_ == Transform::Exp) v = v.array().exp();
      return v;
    }
    case Kind::Uniform:
      break;
  }
  throw ConfigError("uniform prior has no Gaussian reference");
}

Parameter ParameterModel::to_parameter(const Eigen::VectorXd& physical) const {
  if (kind_ != Kind::Field) return Parameter(physical(0));
  return Parameter::field(grid_, std::vector<double>(physical.data(), physical.data() + physical.size()));
}

double ChainTrace::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  return static_cast<double>(std::count(accepted.begin(), accepted.end(), true)) /
         static_cast<double>(accepted.size());
}

ChainTrace pcn_sample(const ParameterModel& model,
                      const std::function<double(const Eigen::VectorXd&)>& potential, double lambda,
                      int iters, std::uint64_t seed, std::optional<Eigen::VectorXd> initial_reference) {
  if (!model.gaussian_reference())
    throw ConfigError("pCN needs a Gaussian reference prior; use pseudo-marginal random walk for Uniform priors");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("pCN step lambda must lie in (0, 1)");
  if (iters < 0) throw ConfigError("iteration count must be non-negative");
  const int dim = model.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;

  Eigen::VectorXd w = initial_reference.value_or(Eigen::VectorXd::Zero(dim));
  if (w.size() != dim) throw ConfigError("initial reference vector has the wrong dimension");
  Eigen::VectorXd phys = model.to_physical(w);
  double phi = potential(phys);
  const double keep = std::sqrt(1.0 - lambda * lambda);

  ChainTrace t;
  t.seed = seed;
  Eigen::VectorXd xi(dim);
  for (int it = 0; it < iters; ++it) {
    for (int k = 0; k < dim; ++k) xi(k) = normal(rng);
    const Eigen::VectorXd w_new = keep * w + lambda * xi;
    const Eigen::VectorXd phys_new = model.to_physical(w_new);
    const double phi_new = potential(phys_new);
    const double u = unif(rng);
    const bool accept = std::isfinite(phi_new) && std::log(u) < phi - phi_new;
    if (accept) {
      w = w_new;
      phys = phys_new;
      phi = phi_new;
    }
    t.theta.push_back(phys(0));
    t.states.push_back(phys);
    t.log_like.push_back(-phi);
    t.accepted.push_back(accept);
  }
  return t;
}

ChainTrace random_walk_metropolis(const std::function<double(double)>& log_target, double initial,
                                  double proposal_sd, int iters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  double theta = initial;
  double lt = log_target(theta);
  ChainTrace t;
  t.seed = seed;
  for (int it = 0; it < iters; ++it) {
    const double prop = theta + proposal_sd * normal(rng);
    const double u = unif(rng);
    const double lp = log_target(prop);
    const bool accept = std::isfinite(lp) && std::log(u) < lp - lt;
    if (accept) {
      theta = prop;
      lt = lp;
    }
    t.theta.push_back(theta);
    t.log_like.push_back(lt);
    t.accepted.push_back(accept);
  }
  return t;
}

// ---------------------------------------------------------------------------

std::optional<CollocationPosterior> semi_linear_posterior(const KernelSpec& kernel,
                                                          const OperatorSet& operators,
                                                          const Design& design,
                                                          const Eigen::VectorXd& g,
                                                          const Eigen::VectorXd& b,
                                                          const Eigen::VectorXd& z,
                                                          const Parameter& theta,
                                                          const SemiLinearSplit& split) {
  const Eigen::Index m = static_cast<Eigen::Index>(design.interior.size());
  if (g.size() != m || z.size() != m || b.size() != static_cast<Eigen::Index>(design.boundary.size()))
    throw DomainError("semi-linear data lengths do not match the design");
  OperatorSet ops = operators;
  ops.identity_block = true;
  Eigen::VectorXd data(2 * m + b.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = split.a2_inverse(g(i) - z(i), theta.at(design.interior[static_cast<std::size_t>(i)]));
    if (!std::isfinite(v)) return std::nullopt;
    data(i) = z(i);
    data(m + i) = v;
  }
  data.tail(b.size()) = b;
  CollocationModel model(kernel, ops, design);
  return model.condition(theta, data);
}

SemiLinearEstimator::SemiLinearEstimator(ProblemDefinition problem, KernelSpec kernel, Design design,
                                         ObservationSet obs, MeanProvider means, Options options)
    : problem_(std::move(problem)),
      kernel_(std::move(kernel)),
      design_(std::move(design)),
      obs_(std::move(obs)),
      means_(std::move(means)),
      options_(options) {
  if (!problem_.split) throw ConfigError("semi-linear estimator needs a semi-linear problem");
  if (options_.n_importance < 1) throw ConfigError("n_importance must be at least 1");
  if (!(options_.importance_scale > 0.0)) throw ConfigError("importance scale must be positive");
  solution_count_ = problem_.solution_count;
  g_ = problem_.forcing_at(design_.interior);
  b_ = problem_.boundary_at(design_.boundary);
}

const SemiLinearEstimator::Prepared& SemiLinearEstimator::prepare(double theta, double lengthscale) {
  const auto key = std::make_pair(theta, lengthscale);
  if (auto it = prepared_.find(key); it != prepared_.end()) return it->second;
  if (prepared_.size() >= 8) prepared_.clear();

  const bool has_ell = kernel_.family() == KernelFamily::SquaredExponential ||
                       (kernel_.family() == KernelFamily::IntegralType &&
                        kernel_.base().family() == KernelFamily::SquaredExponential);
  const double ell_key = has_ell ? lengthscale : 0.0;
  auto mit = models_.find(ell_key);
  if (mit == models_.end()) {
    if (models_.size() >= 8) models_.clear();
    const KernelSpec k = has_ell ? kernel_.with_length_scale(lengthscale) : kernel_;
    mit = models_.emplace(ell_key, std::make_shared<CollocationModel>(k, problem_.operator_set(), design_)).first;
  }
  const CollocationModel& model = *mit->second;
  const CollocationPosterior p =
      model.condition(Parameter(theta), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size())));
  const EvaluationCache cache = model.evaluation(obs_.locations);
  const Eigen::MatrixXd c = p.cross(cache);
  Prepared prep;
  prep.w = p.solve(c.transpose()).transpose();
  Eigen::MatrixXd s = obs_.noise_cov;
  if (!options_.plug_in) s += p.cov(cache);
  prep.s.compute(s);
  if (prep.s.info() != Eigen::Success) throw NumericalError("Sigma + Gamma is not positive definite");
  prep.log_det_s = 2.0 * prep.s.matrixLLT().diagonal().array().log().sum();
  prep.m = static_cast<Eigen::Index>(design_.interior.size());
  return prepared_.emplace(key, std::move(prep)).first->second;
}

Eigen::VectorXd SemiLinearEstimator::data_for(const Eigen::VectorXd& z, double theta, bool* rejected) const {
  const Eigen::Index m = z.size();
  Eigen::VectorXd data(2 * m + b_.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = problem_.split->a2_inverse(g_(i) - z(i), theta);
    if (!std::isfinite(v) && rejected != nullptr) *rejected = true;
    data(i) = z(i);
    data(m + i) = v;
  }
  data.tail(b_.size()) = b_;
  return data;
}

SemiLinearEstimator::Proposal SemiLinearEstimator::proposal(const Prepared& prep, double theta,
                                                            const Eigen::VectorXd& centre) const {
  const Eigen::Index m = centre.size();
  const double c = options_.importance_scale;
  Proposal q;
  if (!options_.adapt) {
    q.mean = centre;
    q.root = c * Eigen::MatrixXd::Identity(m, m);
    q.log_det_root = static_cast<double>(m) * std::log(c);
    return q;
  }
  // Gauss-Newton on -log N(y; mu(z), S) - log N(z; centre, c^2 I). Slopes
  // of z -> A2^{-1}(g - z) are secants over a width-c window, bounded where
  // the exact derivative blows up.
  Eigen::VectorXd z = centre;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int step = 0; step < std::max(options_.adapt_steps, 1); ++step) {
    Eigen::VectorXd slope(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double hi = problem_.split->a2_inverse(g_(i) - z(i) - c, theta);
      const double lo = problem_.split->a2_inverse(g_(i) - z(i) + c, theta);
      slope(i) = std::isfinite(hi) && std::isfinite(lo) ? (hi - lo) / (2.0 * c) : 0.0;
    }
    const Eigen::MatrixXd jac = prep.w.leftCols(m) + prep.w.middleCols(m, m) * slope.asDiagonal();
    const Eigen::VectorXd mu = prep.w * data_for(z, theta, nullptr);
    const Eigen::MatrixXd sj = prep.s.solve(jac);
    Eigen::MatrixXd precision = jac.transpose() * sj;
    precision.diagonal().array() += 1.0 / (c * c);
    llt.compute(precision);
    if (llt.info() != Eigen::Success) throw NumericalError("importance precision is not positive definite");
    const Eigen::VectorXd grad = sj.transpose() * (obs_.values - mu) - (z - centre) / (c * c);
    const Eigen::VectorXd next = z + llt.solve(grad);
    if (!next.allFinite()) break;
    z = next;
  }
  q.mean = z;
  // cov = inflate^2 P^{-1} = (inflate L^{-T})(inflate L^{-T})^T
  const Eigen::MatrixXd lt = llt.matrixU();
  q.root = options_.inflate * lt.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
  q.log_det_root = static_cast<double>(m) * std::log(options_.inflate) -
                   llt.matrixLLT().diagonal().array().log().sum();
  return q;
}

Eigen::VectorXd SemiLinearEstimator::log_weights(double theta, int solution_index, double lengthscale,
                                                 std::mt19937_64& rng) {
  const Prepared& prep = prepare(theta, lengthscale);
  const std::vector<Eigen::VectorXd> means = means_(theta);
  if (solution_index < 0 || static_cast<std::size_t>(solution_index) >= means.size())
    throw DomainError("solution index out of range");
  const Eigen::VectorXd& centre = means[static_cast<std::size_t>(solution_index)];
  const Eigen::Index m = prep.m;
  if (centre.size() != m) throw DomainError("importance mean has the wrong length");
  const Eigen::Index nd = 2 * m + b_.size();
  const double n = static_cast<double>(obs_.size());

  if (options_.plug_in) {
    bool rejected = false;
    const Eigen::VectorXd data = data_for(centre, theta, &rejected);
    Eigen::VectorXd lw(1);
    if (rejected) {
      lw(0) = kNegInf;
      return lw;
    }
    const Eigen::VectorXd white = prep.s.matrixL().solve(prep.w * data - obs_.values);
    lw(0) = -0.5 * white.squaredNorm() - 0.5 * prep.log_det_s - 0.5 * n * kLog2Pi;
    return lw;
  }

  const Proposal q = proposal(prep, theta, centre);
  const int draws = options_.n_importance;
  Eigen::MatrixXd data(nd, draws);
  Eigen::VectorXd log_r(draws);
  std::vector<bool> rejected(static_cast<std::size_t>(draws), false);
  std::normal_distribution<double> normal;
  Eigen::VectorXd xi(m);
  for (int k = 0; k < draws; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) xi(i) = normal(rng);
    const Eigen::VectorXd z = q.mean + q.root * xi;
    bool rej = false;
    data.col(k) = data_for(z, theta, &rej);
    rejected[static_cast<std::size_t>(k)] = rej;
    log_r(k) = -0.5 * xi.squaredNorm() - q.log_det_root - 0.5 * static_cast<double>(m) * kLog2Pi;
  }
  const Eigen::MatrixXd resid = (prep.w * data).colwise() - obs_.values;
  const Eigen::MatrixXd white = prep.s.matrixL().solve(resid);
  Eigen::VectorXd lw(draws);
  for (int k = 0; k < draws; ++k) {
    lw(k) = rejected[static_cast<std::size_t>(k)]
                ? kNegInf
                : -0.5 * white.col(k).squaredNorm() - 0.5 * prep.log_det_s - 0.5 * n * kLog2Pi - log_r(k);
  }
  return lw;
}

double SemiLinearEstimator::log_estimate(double theta, int solution_index, double lengthscale,
                                         std::mt19937_64& rng) {
  const Eigen::VectorXd lw = log_weights(theta, solution_index, lengthscale, rng);
  return log_sum_exp(lw) - std::log(static_cast<double>(lw.size()));
}

double SemiLinearEstimator::ess_fraction(double theta, int solution_index, double lengthscale,
                                         std::mt19937_64& rng) {
  const Eigen::VectorXd lw = log_weights(theta, solution_index, lengthscale, rng);
  const double m = lw.maxCoeff();
  if (!std::isfinite(m)) return 0.0;
  const Eigen::ArrayXd w = (lw.array() - m).exp();
  return (w.sum() * w.sum()) / (w.square().sum() * static_cast<double>(lw.size()));
}

double tune_importance_scale(SemiLinearEstimator& estimator, double theta, double lengthscale,
                             const std::vector<double>& ladder, int repeats, std::uint64_t seed) {
  if (ladder.empty() || repeats < 2) throw ConfigError("pilot tuning needs a ladder and at least two repeats");
  std::mt19937_64 rng(seed);
  double best_c = ladder.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (double c : ladder) {
    estimator.set_importance_scale(c);
    double score = 0.0;
    for (int i = 0; i < estimator.solution_count(); ++i) {
      std::vector<double> v;
      for (int r = 0; r < repeats; ++r) v.push_back(estimator.log_estimate(theta, i, lengthscale, rng));
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / repeats;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      score += std::isfinite(mean) ? std::sqrt(ss / (repeats - 1)) : std::numeric_limits<double>::infinity();
    }
    score /= estimator.solution_count();
    if (score < best_score) {
      best_score = score;
      best_c = c;
    }
  }
  estimator.set_importance_scale(best_c);
  return best_c;
}

// ---------------------------------------------------------------------------

double half_cauchy_log_density(double ell, double scale) {
  if (!(ell > 0.0)) return kNegInf;
  const double r = ell / scale;
  return std::log(2.0 / (std::numbers::pi * scale)) - std::log1p(r * r);
}

ChainTrace pseudo_marginal_mcmc(LikelihoodEstimator& estimator, const ParameterModel& prior,
                                const PseudoMarginalOptions& options) {
  if (prior.kind() == ParameterModel::Kind::Field)
    throw ConfigError("pseudo-marginal MCMC is restricted to scalar parameters");
  if (!(options.proposal_sd > 0.0)) throw ConfigError("proposal sd must be positive");
  if (!prior.in_support(options.initial_theta)) throw ConfigError("initial theta outside prior support");
  const LengthscaleOptions& lo = options.lengthscale;
  if (!(lo.initial > 0.0)) throw ConfigError("initial length scale must be positive");

  std::mt19937_64 rng_theta(options.seed);
  std::mt19937_64 rng_ell(options.seed ^ kLengthscaleStream);
  std::mt19937_64 rng_index(options.seed ^ kIndexStream);
  std::mt19937_64 rng_est(options.seed ^ kEstimatorStream);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const int solutions = estimator.solution_count();
  std::uniform_int_distribution<int> pick(0, std::max(solutions - 1, 0));

  double theta = options.initial_theta;
  int index = solutions > 1 ? pick(rng_index) : 0;
  double ell = lo.initial;
  double log_like = estimator.log_estimate(theta, index, ell, rng_est);
  const auto log_ell_prior = [&](double e) { return lo.sample ? half_cauchy_log_density(e, lo.scale) : 0.0; };

  ChainTrace t;
  t.seed = options.seed;
  for (int it = 0; it < options.iters; ++it) {
    const double theta_new = theta + options.proposal_sd * normal(rng_theta);
    const int index_new = solutions > 1 ? pick(rng_index) : 0;
    const double ell_new = lo.sample ? ell * std::exp(lo.proposal_sd * normal(rng_ell)) : ell;
    const double u = unif(rng_theta);
    bool accept = false;
    if (prior.in_support(theta_new)) {
      const double ll_new = estimator.log_estimate(theta_new, index_new, ell_new, rng_est);
      if (std::isfinite(ll_new)) {
        double log_alpha = prior.log_prior(theta_new) - prior.log_prior(theta) + ll_new - log_like;
        if (lo.sample)
          log_alpha += log_ell_prior(ell_new) - log_ell_prior(ell) + std::log(ell_new) - std::log(ell);
        if (!std::isfinite(log_like) || std::log(u) < log_alpha) {
          accept = true;
          theta = theta_new;
          index = index_new;
          ell = ell_new;
          log_like = ll_new;
        }
      }
    }
    t.theta.push_back(theta);
    t.log_like.push_back(log_like);
    t.accepted.push_back(accept);
    if (solutions > 1) t.solution_index.push_back(index);
    if (lo.sample) t.lengthscale.push_back(ell);
  }
  return t;
}

// ---------------------------------------------------------------------------

CalibrationResult calibrate_empirical_bayes(const std::function<double(double)>& log_like,
                                            std::vector<double> grid) {
  if (grid.empty()) throw ConfigError("calibration grid is empty");
  std::sort(grid.begin(), grid.end());
  CalibrationResult r;
  r.grid = grid;
  const auto safe = [&](double v) {
    try {
      const double l = log_like(v);
      return std::isnan(l) ? kNegInf : l;
    } catch (const NumericalError&) {
      return kNegInf;
    }
  };
  for (double g : grid) r.surface.push_back(safe(g));
  const auto best = std::max_element(r.surface.begin(), r.surface.end());
  if (!std::isfinite(*best)) throw NumericalError("calibration failed: every grid value was numerically infeasible");
  const std::size_t k = static_cast<std::size_t>(best - r.surface.begin());
  r.best = grid[k];
  r.best_log_like = *best;
  if (grid.size() == 1) return r;

  double a = grid[k == 0 ? 0 : k - 1];
  double b = grid[std::min(k + 1, grid.size() - 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = safe(c);
  double fd = safe(d);
  for (int it = 0; it < 40 && (b - a) > 1e-10 * std::max(1.0, std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = safe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = safe(d);
    }
  }
  const double x = fc > fd ? c : d;
  const double fx = std::max(fc, fd);
  if (fx > r.best_log_like) {
    r.best = x;
    r.best_log_like = fx;
  }
  return r;
}

GridPosterior grid_posterior(std::vector<double> theta, const std::vector<double>& log_post) {
  if (theta.size() != log_post.size() || theta.size() < 2)
    throw ConfigError("grid posterior needs matching grids of at least two points");
  GridPosterior g;
  const double m = *std::max_element(log_post.begin(), log_post.end());
  if (!std::isfinite(m)) throw NumericalError("posterior vanishes on the whole grid");
  std::vector<double> dens(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) dens[i] = std::exp(log_post[i] - m);
  const auto trap = [&](auto f) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < theta.size(); ++i)
      s += 0.5 * (theta[i + 1] - theta[i]) * (f(i) + f(i + 1));
    return s;
  };
  const double z = trap([&](std::size_t i) { return dens[i]; });
  for (double& d : dens) d /= z;
  g.mean = trap([&](std::size_t i) { return theta[i] * dens[i]; });
  const double second = trap([&](std::size_t i) { return (theta[i] - g.mean) * (theta[i] - g.mean) * dens[i]; });
  g.sd = std::sqrt(std::max(second, 0.0));
  g.mode = theta[static_cast<std::size_t>(std::max_element(dens.begin(), dens.end()) - dens.begin())];
  g.theta = std::move(theta);
  g.density = std::move(dens);
  return g;
}

GridPosterior adaptive_grid_posterior(const std::function<double(double)>& log_post, double lo,
                                      double hi, int coarse, int fine) {
  if (!(lo > 0.0 && lo < hi) || coarse < 3 || fine < 3) throw ConfigError("invalid grid posterior bounds");
  std::vector<double> grid(static_cast<std::size_t>(coarse));
  std::vector<double> lp(grid.size());
  for (int i = 0; i < coarse; ++i) {
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (coarse - 1));
    lp[static_cast<std::size_t>(i)] = log_post(grid[static_cast<std::size_t>(i)]);
  }
  const double m = *std::max_element(lp.begin(), lp.end());
  if (!std::isfinite(m)) throw NumericalError("posterior vanishes on the coarse grid");
  std::size_t first = grid.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (lp[i] > m - 40.0) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  const double a = grid[first == 0 ? 0 : first - 1];
  const double b = grid[std::min(last + 1, grid.size() - 1)];
  std::vector<double> fg(static_cast<std::size_t>(fine));
  std::vector<double> flp(fg.size());
  for (int i = 0; i < fine; ++i) {
    fg[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (fine - 1);
    flp[static_cast<std::size_t>(i)] = log_post(fg[static_cast<std::size_t>(i)]);
  }
  return grid_posterior(std::move(fg), flp);
}

void write_trace_csv(const std::string& path, const ChainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "iter,theta,loglike,accepted,solution_index,lengthscale\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << trace.theta[i] << ',' << trace.log_like[i] << ',' << (trace.accepted[i] ? 1 : 0) << ',';
    if (i < trace.solution_index.size()) out << trace.solution_index[i];
    out << ',';
    if (i < trace.lengthscale.size()) out << trace.lengthscale[i];
    out << '\n';
  }
}

void write_trace_meta(const std::string& path, const ChainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "seed = " << trace.seed << "\n";
  out << "iterations = " << trace.size() << "\n";
  out << "acceptance_rate = " << trace.acceptance_rate() << "\n";
}

double integrated_autocorrelation_time(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return 1.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  const auto acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = acov(0);
  if (!(c0 > 0.0)) return 1.0;
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (acov(2 * k) + acov(2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(tau, 1.0);
}

}  // namespace probmesh
