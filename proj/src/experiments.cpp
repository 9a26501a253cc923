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

#include "probmesh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "probmesh/errors.hpp"

namespace probmesh {

namespace {

std::ofstream open_csv(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

std::vector<int> int_list(const ExperimentConfig& cfg, const std::string& key, std::vector<int> fallback) {
  if (!cfg.has(key)) return fallback;
  std::vector<int> out;
  for (double v : cfg.get_list(key, {})) {
    if (v < 1 || v != std::floor(v)) throw ConfigError(key + ": entries must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::uint64_t seed_of(const ExperimentConfig& cfg) {
  const int s = cfg.get_int("seed", 1);
  if (s < 0) throw ConfigError("seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

void write_point(std::ostream& out, Point p, int dim) {
  out << p.x;
  if (dim == 2) out << ',' << p.y;
}

const char* point_header(int dim) { return dim == 1 ? "x1" : "x1,x2"; }

std::vector<Point> boundary_for(const ExperimentConfig& cfg, const ProblemDefinition& problem) {
  if (problem.domain.dim() == 1) return problem.domain.boundary_points(1);
  return problem.boundary_design(cfg.get_int("design.boundary_per_edge", 8));
}

double theta_for_design(const ExperimentConfig& cfg, const ProblemDefinition& problem) {
  return cfg.get_double("design.theta", problem.split ? 0.04 : 1.0);
}

ObservationSet observations_from_file(const std::string& path, double gamma, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read data file " + path);
  std::string line;
  std::getline(in, line);
  std::vector<Point> x;
  std::vector<double> y;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::vector<double> v;
    while (std::getline(ss, f, ',')) {
      try {
        v.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number");
      }
    }
    if (static_cast<int>(v.size()) != dim + 1)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) + " columns");
    x.push_back({v[0], dim == 2 ? v[1] : 0.0});
    y.push_back(v.back());
  }
  if (x.empty()) throw ConfigError(path + ": no observations");
  return ObservationSet::isotropic(std::move(x), Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())), gamma);
}

void write_observations(const std::string& dir, const ObservationSet& obs, int dim) {
  auto out = open_csv(dir, "observations.csv");
  out << point_header(dim) << ",y\n";
  for (std::size_t i = 0; i < obs.size(); ++i) {
    write_point(out, obs.locations[i], dim);
    out << ',' << obs.values(static_cast<Eigen::Index>(i)) << '\n';
  }
}

}  // namespace

KernelSpec kernel_from_config(const ExperimentConfig& cfg, const Domain& domain) {
  const std::string fam = cfg.get_string("kernel.family", domain.dim() == 1 ? "natural_poisson_1d" : "squared_exponential");
  const double scale = cfg.get_double("kernel.scale", fam == "squared_exponential" ? 0.15 : 2.5);
  if (!(scale > 0.0)) throw ConfigError("kernel.scale must be positive");
  auto simple = [&](const std::string& name) {
    switch (parse_family(name)) {
      case KernelFamily::WendlandC0:
        return KernelSpec::wendland_c0(scale, domain);
      case KernelFamily::WendlandC2:
        return KernelSpec::wendland_c2(scale, domain);
      case KernelFamily::SquaredExponential:
        return KernelSpec::squared_exponential(scale, domain);
      case KernelFamily::NaturalPoisson1D:
        if (domain.dim() != 1) throw ConfigError("natural_poisson_1d needs a 1D domain");
        return KernelSpec::natural_poisson_1d(scale);
      case KernelFamily::IntegralType:
        break;
    }
    throw ConfigError("kernel.base must be a base family");
  };
  if (parse_family(fam) == KernelFamily::IntegralType)
    return KernelSpec::integral(simple(cfg.get_string("kernel.base", "wendland_c2")), cfg.get_int("kernel.quadrature", 0));
  return simple(fam);
}

std::vector<Point> uniform_interior(const Domain& domain, int m) {
  if (m < 1) throw ConfigError("design size must be at least 1");
  std::vector<Point> out;
  if (domain.dim() == 1) {
    const auto [a, b] = domain.bounds(0);
    for (int j = 1; j <= m; ++j) out.push_back({a + (b - a) * j / (m + 1.0), 0.0});
    return out;
  }
  const int cols = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(m)))));
  const int rows = (m + cols - 1) / cols;
  const auto [x0, x1] = domain.bounds(0);
  const auto [y0, y1] = domain.bounds(1);
  for (int j = 0; j < rows && static_cast<int>(out.size()) < m; ++j)
    for (int i = 0; i < cols && static_cast<int>(out.size()) < m; ++i) {
      const Point p{x0 + (x1 - x0) * (i + 0.5) / cols, y0 + (y1 - y0) * (j + 0.5) / rows};
      if (domain.contains_interior(p)) out.push_back(p);
    }
  if (static_cast<int>(out.size()) < m) throw ConfigError("uniform layout does not fit the domain; use design.source = file");
  return out;
}

Design design_from_config(const ExperimentConfig& cfg, const ProblemDefinition& problem,
                          const KernelSpec& kernel, int m) {
  const std::string source = cfg.get_string("design.source", "uniform");
  Design d;
  if (source == "file") {
    d = read_design_csv(cfg.require_string("design.file"));
    if (d.boundary.empty()) d.boundary = boundary_for(cfg, problem);
  } else if (source == "uniform" || source == "optimise") {
    d.interior = uniform_interior(problem.domain, m);
    d.boundary = boundary_for(cfg, problem);
    if (source == "optimise") {
      const DesignProblem dp(kernel, problem.operator_set(), problem.domain, DesignLoss::AOptimal);
      ExchangeOptions opt;
      opt.sweeps = cfg.get_int("design.sweeps", 2);
      opt.candidates_per_coord = cfg.get_int("design.candidates", 16);
      opt.seed = seed_of(cfg);
      opt.threads = static_cast<unsigned>(cfg.get_int("design.threads", 0));
      d = coordinate_exchange(dp, d, theta_for_design(cfg, problem), opt).design;
    }
  } else {
    throw ConfigError("design.source must be uniform, file or optimise");
  }
  d.validate(problem.domain);
  return d;
}

ParameterModel prior_from_string(const std::string& spec) {
  std::stringstream ss(spec);
  std::string kind;
  ss >> kind;
  double a = 0.0;
  double b = 0.0;
  if (kind == "field") {
    int n = 0;
    std::string transform = "exp";
    if (!(ss >> n >> b) || n < 2 || !(b > 0.0)) throw ConfigError("field prior: expected 'field N LENGTHSCALE [exp|identity]'");
    ss >> transform;
    std::vector<double> grid;
    for (int i = 0; i < n; ++i) grid.push_back(static_cast<double>(i) / (n - 1));
    const auto t = transform == "identity" ? ParameterModel::Transform::Identity : ParameterModel::Transform::Exp;
    return ParameterModel::field(std::move(grid), KernelSpec::squared_exponential(b, Domain::unit_interval()), t);
  }
  if (!(ss >> a >> b)) throw ConfigError("prior '" + spec + "': expected two numbers");
  if (kind == "log_gaussian") return ParameterModel::log_gaussian(a, b);
  if (kind == "gaussian") return ParameterModel::gaussian(a, b);
  if (kind == "uniform") return ParameterModel::uniform(a, b);
  throw ConfigError("unknown prior kind '" + kind + "'");
}

std::vector<ConvergenceRow> convergence_study(const ProblemDefinition& problem, const KernelSpec& kernel,
                                              const std::vector<int>& m_list, double theta, int grid_points) {
  if (!problem.has_exact()) throw ConfigError("convergence study needs an exact solution");
  const std::vector<Point> grid = problem.domain.grid(grid_points);
  Eigen::VectorXd u(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) u(static_cast<Eigen::Index>(i)) = problem.exact_solution(grid[i], theta);
  std::vector<ConvergenceRow> rows;
  for (int m : m_list) {
    Design d;
    d.interior = uniform_interior(problem.domain, m);
    d.boundary = problem.domain.dim() == 1 ? problem.domain.boundary_points(1) : problem.boundary_design(8);
    const CollocationPosterior p = assemble(kernel, problem.operator_set(), d, problem.forcing_at(d.interior),
                                            problem.boundary_at(d.boundary), Parameter(theta));
    const EvaluationCache cache = p.model().evaluation(grid, OperatorDescriptor::identity(), false);
    const Eigen::VectorXd mu = p.mean(cache);
    const Eigen::VectorXd var = p.variance(cache);
    ConvergenceRow r;
    r.m = m;
    r.l2_error = (mu - u).norm();
    if (problem.domain.dim() == 1) {
      for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        r.sigma2_l1 += 0.5 * (grid[i + 1].x - grid[i].x) * (var(static_cast<Eigen::Index>(i)) + var(static_cast<Eigen::Index>(i + 1)));
    } else {
      r.sigma2_l1 = var.mean() * problem.domain.measure();
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<IntervalRow> inverse_grid_study(const ProblemDefinition& problem, const KernelSpec& kernel,
                                            const ObservationSet& obs, const ParameterModel& prior,
                                            const std::vector<int>& m_list, double lo, double hi,
                                            std::vector<GridPosterior>* posteriors) {
  std::vector<IntervalRow> rows;
  for (int m : m_list) {
    Design d;
    d.interior = uniform_interior(problem.domain, m);
    d.boundary = problem.domain.dim() == 1 ? problem.domain.boundary_points(1) : problem.boundary_design(8);
    const CollocationModel model(kernel, problem.operator_set(), d);
    const EvaluationCache cache = model.evaluation(obs.locations);
    Eigen::VectorXd data(static_cast<Eigen::Index>(d.size()));
    data << problem.forcing_at(d.interior), problem.boundary_at(d.boundary);
    for (const char* method : {"pmm", "plugin"}) {
      const bool plug = std::string(method) == "plugin";
      const auto log_post = [&](double t) {
        if (!prior.in_support(t)) return -std::numeric_limits<double>::infinity();
        const CollocationPosterior p = model.condition(Parameter(t), data);
        return prior.log_prior(t) + (plug ? plug_in_log_likelihood(p, cache, obs) : marginal_log_likelihood(p, cache, obs));
      };
      GridPosterior g = adaptive_grid_posterior(log_post, lo, hi);
      rows.push_back({m, method, g.mean, g.sd, g.mode});
      if (posteriors != nullptr) posteriors->push_back(std::move(g));
    }
  }
  return rows;
}

ChainSummary summarise_chain(const std::vector<double>& theta, double lo, double hi, int bins, double burn) {
  if (theta.empty() || bins < 1 || !(lo < hi)) throw ConfigError("chain summary needs samples, bins and a range");
  const std::size_t start = static_cast<std::size_t>(burn * static_cast<double>(theta.size()));
  const std::vector<double> kept(theta.begin() + static_cast<std::ptrdiff_t>(start), theta.end());
  ChainSummary s;
  s.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
  double ss = 0.0;
  for (double v : kept) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(kept.size()));
  const double width = (hi - lo) / bins;
  std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
  for (double v : kept) {
    const int b = std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1);
    count[static_cast<std::size_t>(b)] += 1.0;
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(count.begin(), count.end()) - count.begin());
  s.mode = lo + width * (static_cast<double>(best) + 0.5);
  for (double& c : count) c /= static_cast<double>(kept.size()) * width;
  s.density = std::move(count);
  return s;
}

// ---------------------------------------------------------------------------

std::vector<ConvergenceRow> cmd_forward(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ProblemDefinition problem = problem_by_name(cfg.get_string("problem", "poisson_1d"));
  if (problem.split) throw ConfigError("forward solves need a linear problem");
  const KernelSpec kernel = kernel_from_config(cfg, problem.domain);
  const double theta = cfg.get_double("forward.theta", 1.0);
  const int dim = problem.domain.dim();
  const int grid_points = cfg.get_int("forward.grid_points", 100);
  const int samples = cfg.get_int("forward.samples", 5);
  if (grid_points < 2 || samples < 1) throw ConfigError("forward.grid_points must be >= 2 and forward.samples >= 1");
  const std::uint64_t seed = seed_of(cfg);

  const Design d = design_from_config(cfg, problem, kernel, cfg.get_int("design.m", 39));
  const CollocationPosterior p = assemble(kernel, problem.operator_set(), d, problem.forcing_at(d.interior),
                                          problem.boundary_at(d.boundary), Parameter(theta));
  const std::vector<Point> grid = problem.domain.grid(grid_points);
  const EvaluationCache cache = p.model().evaluation(grid);
  const Eigen::VectorXd mu = p.mean(cache);
  const Eigen::VectorXd var = p.variance(cache);
  {
    auto out = open_csv(out_dir, "solution.csv");
    out << point_header(dim) << ",mu,sigma2" << (problem.has_exact() ? ",exact" : "") << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
      write_point(out, grid[i], dim);
      out << ',' << mu(static_cast<Eigen::Index>(i)) << ',' << var(static_cast<Eigen::Index>(i));
      if (problem.has_exact()) out << ',' << problem.exact_solution(grid[i], theta);
      out << '\n';
    }
  }
  {
    const Eigen::MatrixXd draws = p.sample(grid, seed, samples);
    auto out = open_csv(out_dir, "samples.csv");
    out << point_header(dim);
    for (int s = 0; s < samples; ++s) out << ",sample_" << s;
    out << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
      write_point(out, grid[i], dim);
      for (int s = 0; s < samples; ++s) out << ',' << draws(s, static_cast<Eigen::Index>(i));
      out << '\n';
    }
  }
  write_design_csv((std::filesystem::path(out_dir) / "design.csv").string(), d, dim);

  std::vector<ConvergenceRow> rows;
  if (cfg.has("design.m_list")) {
    rows = convergence_study(problem, kernel, int_list(cfg, "design.m_list", {}), theta, grid_points);
    auto out = open_csv(out_dir, "convergence.csv");
    out << "m,l2_error,sigma2_l1\n";
    for (const auto& r : rows) out << r.m << ',' << r.l2_error << ',' << r.sigma2_l1 << '\n';
  }
  return rows;
}

std::vector<IntervalRow> cmd_inverse(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ProblemDefinition problem = problem_by_name(cfg.get_string("problem", "parametric_poisson_1d"));
  if (problem.split) throw ConfigError("use the allen-cahn command for semi-linear problems");
  const KernelSpec kernel = kernel_from_config(cfg, problem.domain);
  const int dim = problem.domain.dim();
  const std::uint64_t seed = seed_of(cfg);
  const double gamma = cfg.get_double("obs.gamma", 0.001);
  if (!(gamma > 0.0)) throw ConfigError("obs.gamma must be positive");

  ObservationSet obs;
  if (cfg.has("obs.data_file")) {
    obs = observations_from_file(cfg.get_string("obs.data_file", ""), gamma, dim);
  } else {
    if (!problem.has_exact()) throw ConfigError("synthetic data needs an exact solution; set obs.data_file");
    auto pts = cfg.get_points("obs.locations");
    if (pts.empty()) pts = {{0.25, 0.0}, {0.75, 0.0}};
    const double theta_true = cfg.get_double("obs.theta_true", 1.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Point> x;
    Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      x.push_back({pts[i].first, pts[i].second});
      y(static_cast<Eigen::Index>(i)) = problem.exact_solution(x.back(), theta_true) + gamma * normal(rng);
    }
    obs = ObservationSet::isotropic(std::move(x), y, gamma);
  }
  obs.validate(problem.domain);
  write_observations(out_dir, obs, dim);

  const ParameterModel prior = prior_from_string(cfg.get_string("inference.prior", "log_gaussian 0 1"));
  const std::vector<int> m_list = int_list(cfg, "design.m_list", {5, 10, 20, 40, 80});
  const std::string method = cfg.get_string("inference.method", "grid");
  std::vector<IntervalRow> rows;

  if (method == "grid") {
    if (prior.kind() == ParameterModel::Kind::Field) throw ConfigError("grid inference needs a scalar prior");
    const double lo = cfg.get_double("inference.theta_lo", prior.kind() == ParameterModel::Kind::Uniform ? prior.a() : 0.1);
    const double hi = cfg.get_double("inference.theta_hi", prior.kind() == ParameterModel::Kind::Uniform ? prior.b() : 10.0);
    std::vector<GridPosterior> post;
    rows = inverse_grid_study(problem, kernel, obs, prior, m_list, lo, hi, &post);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      auto out = open_csv(out_dir, "posterior_m" + std::to_string(rows[k].m) + "_" + rows[k].method + ".csv");
      out << "theta,density\n";
      for (std::size_t i = 0; i < post[k].theta.size(); ++i) out << post[k].theta[i] << ',' << post[k].density[i] << '\n';
    }
  } else if (method == "pcn" || method == "pseudo_marginal") {
    const int iters = cfg.get_int("inference.iters", 5000);
    for (int m : m_list) {
      Design d;
      d.interior = uniform_interior(problem.domain, m);
      d.boundary = boundary_for(cfg, problem);
      const CollocationModel model(kernel, problem.operator_set(), d);
      const EvaluationCache cache = model.evaluation(obs.locations);
      Eigen::VectorXd data(static_cast<Eigen::Index>(d.size()));
      data << problem.forcing_at(d.interior), problem.boundary_at(d.boundary);
      for (const char* name : {"pmm", "plugin"}) {
        const bool plug = std::string(name) == "plugin";
        const auto like = [&](const Parameter& t) {
          const CollocationPosterior p = model.condition(t, data);
          return plug ? plug_in_log_likelihood(p, cache, obs) : marginal_log_likelihood(p, cache, obs);
        };
        ChainTrace trace;
        if (method == "pcn") {
          const auto potential = [&](const Eigen::VectorXd& phys) {
            try {
              return -like(prior.to_parameter(phys));
            } catch (const NumericalError&) {
              return std::numeric_limits<double>::infinity();
            }
          };
          trace = pcn_sample(prior, potential, cfg.get_double("inference.lambda", 0.3), iters, seed + 1);
          if (prior.kind() == ParameterModel::Kind::Field)
            for (std::size_t i = 0; i < trace.size(); ++i) trace.theta[i] = trace.states[i].mean();
        } else {
          if (prior.kind() == ParameterModel::Kind::Field) throw ConfigError("pseudo_marginal inference needs a scalar prior");
          ExactEstimator est([&](double t) { return like(Parameter(t)); });
          PseudoMarginalOptions po;
          po.initial_theta = cfg.get_double("inference.initial_theta", 1.0);
          po.proposal_sd = cfg.get_double("inference.proposal_sd", 0.1);
          po.iters = iters;
          po.seed = seed + 1;
          trace = pseudo_marginal_mcmc(est, prior, po);
        }
        const std::string stem = "trace_m" + std::to_string(m) + "_" + name;
        write_trace_csv((std::filesystem::path(out_dir) / (stem + ".csv")).string(), trace);
        write_trace_meta((std::filesystem::path(out_dir) / (stem + ".meta")).string(), trace);
        const auto [lo, hi] = std::minmax_element(trace.theta.begin(), trace.theta.end());
        const ChainSummary s = summarise_chain(trace.theta, *lo, *hi + 1e-12, 50);
        rows.push_back({m, name, s.mean, s.sd, s.mode});
      }
    }
  } else {
    throw ConfigError("inference.method must be grid, pcn or pseudo_marginal");
  }

  auto out = open_csv(out_dir, "credible_intervals.csv");
  out << "m,method,mean,sd\n";
  for (const auto& r : rows) out << r.m << ',' << r.method << ',' << r.mean << ',' << r.sd << '\n';
  return rows;
}

ExchangeResult cmd_design(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ProblemDefinition problem = problem_by_name(cfg.get_string("problem", "poisson_1d"));
  const KernelSpec kernel = kernel_from_config(cfg, problem.domain);
  const int dim = problem.domain.dim();
  const int m = cfg.get_int("design.m", 5);
  const std::string loss = cfg.get_string("design.loss", "a_optimal");
  if (loss != "a_optimal" && loss != "d_optimal") throw ConfigError("design.loss must be a_optimal or d_optimal");
  const DesignProblem dp(kernel, problem.operator_set(), problem.domain,
                         loss == "a_optimal" ? DesignLoss::AOptimal : DesignLoss::DOptimal);

  Design initial;
  const std::string init = cfg.get_string("design.initial", "random");
  if (init == "random") {
    std::mt19937_64 rng(seed_of(cfg));
    initial.interior = random_interior(problem.domain, m, rng);
    initial.boundary = boundary_for(cfg, problem);
  } else if (init == "uniform") {
    initial.interior = uniform_interior(problem.domain, m);
    initial.boundary = boundary_for(cfg, problem);
  } else if (init == "file") {
    initial = read_design_csv(cfg.require_string("design.file"));
    if (initial.boundary.empty()) initial.boundary = boundary_for(cfg, problem);
  } else {
    throw ConfigError("design.initial must be random, uniform or file");
  }
  initial.validate(problem.domain);

  ExchangeOptions opt;
  opt.sweeps = cfg.get_int("design.sweeps", 3);
  opt.candidates_per_coord = cfg.get_int("design.candidates", 16);
  opt.seed = seed_of(cfg);
  opt.threads = static_cast<unsigned>(cfg.get_int("design.threads", 0));
  if (opt.sweeps < 0 || opt.candidates_per_coord < 2) throw ConfigError("design.sweeps must be >= 0 and design.candidates >= 2");
  ExchangeResult r = coordinate_exchange(dp, initial, theta_for_design(cfg, problem), opt);

  std::filesystem::create_directories(out_dir);
  write_design_csv((std::filesystem::path(out_dir) / "design_initial.csv").string(), initial, dim);
  write_design_csv((std::filesystem::path(out_dir) / "design_optimised.csv").string(), r.design, dim);
  auto out = open_csv(out_dir, "loss_trace.csv");
  out << "sweep,loss\n";
  for (std::size_t i = 0; i < r.loss_trace.size(); ++i) out << i << ',' << r.loss_trace[i] << '\n';
  return r;
}

AllenCahnResult cmd_allen_cahn(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ProblemDefinition problem = problem_by_name(cfg.get_string("problem", "allen_cahn_2d"));
  if (!problem.split) throw ConfigError("the allen-cahn command needs a semi-linear problem");
  const std::uint64_t seed = seed_of(cfg);
  const int grid_n = cfg.get_int("crude.grid_n", 30);
  const double theta0 = cfg.get_double("crude.theta", 0.04);
  AllenCahnResult result;

  // Crude solutions at the reference theta.
  result.crude = crude_solutions(problem, theta0, grid_n, seed);
  for (const CrudeSolution& s : result.crude) {
    auto out = open_csv(out_dir, "crude_" + s.label + ".csv");
    out << "x1,x2,u\n";
    const int n = s.field.n();
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        out << s.field.h() * i << ',' << s.field.h() * j << ',' << s.field.value(i, j) << '\n';
  }
  {
    auto out = open_csv(out_dir, "crude_summary.csv");
    out << "label,residual,iterations,mean\n";
    for (const CrudeSolution& s : result.crude)
      out << s.label << ',' << s.residual << ',' << s.iterations << ',' << s.field.mean() << '\n';
  }

  // Observations.
  const double gamma = cfg.get_double("obs.gamma", 0.1);
  if (!(gamma > 0.0)) throw ConfigError("obs.gamma must be positive");
  ObservationSet obs;
  if (cfg.has("obs.data_file")) {
    obs = observations_from_file(cfg.get_string("obs.data_file", ""), gamma, 2);
  } else {
    const std::string label = cfg.get_string("obs.solution", "unstable");
    const int data_n = cfg.get_int("obs.data_grid_n", 40);
    const auto truth = crude_solutions(problem, cfg.get_double("obs.theta_true", theta0), data_n, seed);
    const auto it = std::find_if(truth.begin(), truth.end(), [&](const CrudeSolution& s) { return s.label == label; });
    if (it == truth.end()) throw ConfigError("obs.solution must be negative_stable, unstable or positive_stable");
    std::vector<Point> x;
    auto pts = cfg.get_points("obs.locations");
    if (pts.empty()) {
      x = problem.domain.interior_grid(cfg.get_int("obs.grid", 4));
    } else {
      for (const auto& [a, b] : pts) x.push_back({a, b});
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd y(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) y(static_cast<Eigen::Index>(i)) = it->field.at(x[i]) + gamma * normal(rng);
    obs = ObservationSet::isotropic(std::move(x), y, gamma);
  }
  obs.validate(problem.domain);
  write_observations(out_dir, obs, 2);

  const ParameterModel prior = prior_from_string(cfg.get_string("inference.prior", "uniform 0.02 0.15"));
  if (prior.kind() == ParameterModel::Kind::Field) throw ConfigError("the allen-cahn command needs a scalar prior");
  const double lo = prior.kind() == ParameterModel::Kind::Uniform ? prior.a() : cfg.get_double("inference.theta_lo", 0.02);
  const double hi = prior.kind() == ParameterModel::Kind::Uniform ? prior.b() : cfg.get_double("inference.theta_hi", 0.15);
  const std::vector<int> m_list = int_list(cfg, "design.m_list", {5, 10, 20});
  const KernelSpec base_kernel = kernel_from_config(cfg, problem.domain);
  CrudeSolutionCache crude(problem, grid_n, cfg.get_double("crude.resolution", 1e-3));

  std::vector<Design> designs;
  for (int m : m_list) designs.push_back(design_from_config(cfg, problem, base_kernel, m));

  SemiLinearEstimator::Options base_opt;
  base_opt.n_importance = cfg.get_int("inference.n_importance", 500);

  // Length scale: fixed, calibrated on the plug-in profile, or sampled.
  const std::string ell_mode = cfg.get_string("inference.lengthscale", "empirical_bayes");
  double ell = cfg.get_double("inference.lengthscale_value", base_kernel.length_scale() > 0 ? base_kernel.length_scale() : 0.15);
  if (ell_mode == "empirical_bayes") {
    const Design& d = designs[static_cast<std::size_t>(std::max_element(m_list.begin(), m_list.end()) - m_list.begin())];
    SemiLinearEstimator::Options o = base_opt;
    o.plug_in = true;
    o.n_importance = 1;
    SemiLinearEstimator est(problem, base_kernel, d, obs,
                            [&](double t) { return crude.a1_means(t, d.interior); }, o);
    std::mt19937_64 rng(seed);
    const auto profile = [&](double l) {
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 26; ++k) {
        const double t = lo + (hi - lo) * (k + 0.5) / 27.0;
        for (int i = 0; i < est.solution_count(); ++i) best = std::max(best, est.log_estimate(t, i, l, rng));
      }
      return best;
    };
    const CalibrationResult cal =
        calibrate_empirical_bayes(profile, cfg.get_list("inference.lengthscale_grid", {0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.25, 0.3}));
    ell = cal.best;
    auto out = open_csv(out_dir, "lengthscale_calibration.csv");
    out << "lengthscale,log_like\n";
    for (std::size_t i = 0; i < cal.grid.size(); ++i) out << cal.grid[i] << ',' << cal.surface[i] << '\n';
  } else if (ell_mode != "fixed" && ell_mode != "half_cauchy") {
    throw ConfigError("inference.lengthscale must be fixed, empirical_bayes or half_cauchy");
  }
  result.lengthscale = ell;

  const int bins = cfg.get_int("inference.bins", 26);
  const std::vector<double> ladder = cfg.get_list("inference.importance_ladder", {});
  for (std::size_t k = 0; k < m_list.size(); ++k) {
    const int m = m_list[k];
    const Design& d = designs[k];
    write_design_csv((std::filesystem::path(out_dir) / ("design_m" + std::to_string(m) + ".csv")).string(), d, 2);
    const auto means = [&](double t) { return crude.a1_means(t, d.interior); };
    std::vector<ChainSummary> summaries;
    for (const char* name : {"pmm", "plugin"}) {
      const bool plug = std::string(name) == "plugin";
      SemiLinearEstimator::Options o = base_opt;
      o.plug_in = plug;
      if (plug) o.n_importance = 1;
      SemiLinearEstimator est(problem, base_kernel, d, obs, means, o);
      if (!plug) {
        if (!ladder.empty())
          tune_importance_scale(est, theta_for_design(cfg, problem), ell, ladder, 10, seed ^ 0x5bd1e995ULL);
        else
          est.set_importance_scale(cfg.get_double("inference.importance_scale", 10.0));
      }
      PseudoMarginalOptions po;
      po.initial_theta = cfg.get_double("inference.initial_theta", 0.5 * (lo + hi));
      po.proposal_sd = cfg.get_double("inference.proposal_sd", 0.01);
      po.iters = cfg.get_int("inference.iters", 10000);
      po.seed = seed + 1;
      po.lengthscale.sample = ell_mode == "half_cauchy" && !plug;
      po.lengthscale.initial = ell;
      po.lengthscale.scale = cfg.get_double("inference.lengthscale_scale", 1.0);
      const ChainTrace trace = pseudo_marginal_mcmc(est, prior, po);
      const std::string stem = "trace_m" + std::to_string(m) + "_" + name;
      write_trace_csv((std::filesystem::path(out_dir) / (stem + ".csv")).string(), trace);
      write_trace_meta((std::filesystem::path(out_dir) / (stem + ".meta")).string(), trace);
      const ChainSummary s = summarise_chain(trace.theta, lo, hi, bins);
      const std::set<int> visited(trace.solution_index.begin(), trace.solution_index.end());
      const std::size_t burn = trace.theta.size() / 10;
      result.rows.push_back({m, name, s.mean, s.sd, s.mode, trace.acceptance_rate(), static_cast<int>(visited.size()),
                             integrated_autocorrelation_time(std::vector<double>(trace.theta.begin() + static_cast<std::ptrdiff_t>(burn), trace.theta.end())),
                             plug ? 0.0 : est.options().importance_scale});
      result.traces.push_back(trace);
      summaries.push_back(s);
    }
    auto out = open_csv(out_dir, "histogram_m" + std::to_string(m) + ".csv");
    out << "bin_lo,bin_hi,pmm,plugin\n";
    const double w = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b)
      out << lo + w * b << ',' << lo + w * (b + 1) << ',' << summaries[0].density[static_cast<std::size_t>(b)] << ','
          << summaries[1].density[static_cast<std::size_t>(b)] << '\n';
  }
  auto out = open_csv(out_dir, "summary.csv");
  out << "m,method,mean,sd,mode,acceptance,distinct_indices,iact,importance_scale\n";
  for (const auto& r : result.rows)
    out << r.m << ',' << r.method << ',' << r.mean << ',' << r.sd << ',' << r.mode << ',' << r.acceptance << ','
        << r.distinct_indices << ',' << r.iact << ',' << r.importance_scale << '\n';
  return result;
}

}  // namespace probmesh
