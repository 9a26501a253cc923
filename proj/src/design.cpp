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

#include "probmesh/design.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "probmesh/errors.hpp"

namespace probmesh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
std::vector<double> parallel_map(std::size_t n, unsigned threads, F&& f) {
  std::vector<double> out(n, kInf);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

void set_coord(Point& p, int axis, double v) { (axis == 0 ? p.x : p.y) = v; }

}  // namespace

DesignProblem::DesignProblem(KernelSpec kernel, OperatorSet operators, Domain domain, DesignLoss loss,
                             std::vector<Point> evaluation_points)
    : kernel_(std::move(kernel)),
      operators_(std::move(operators)),
      domain_(std::move(domain)),
      loss_(loss),
      evaluation_points_(std::move(evaluation_points)) {
  if (evaluation_points_.empty()) evaluation_points_ = default_evaluation_points(domain_);
  if (evaluation_points_.empty()) throw ConfigError("design evaluation points are empty");
}

std::vector<Point> DesignProblem::default_evaluation_points(const Domain& domain) {
  return domain.grid(domain.dim() == 1 ? 100 : 20);
}

double design_loss(const DesignProblem& problem, const Design& design, const Parameter& theta) {
  try {
    design.validate(problem.domain());
    const CollocationModel model(problem.kernel(), problem.operators(), design);
    const auto& pts = problem.evaluation_points();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
    const CollocationPosterior post = model.condition(theta, zero);
    if (problem.loss() == DesignLoss::AOptimal) {
      const EvaluationCache cache = model.evaluation(pts, OperatorDescriptor::identity(), false);
      return post.variance(cache).mean();
    }
    const EvaluationCache cache = model.evaluation(pts);
    const Eigen::MatrixXd sigma = post.cov(cache);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) return -kInf;
    return ev.cwiseMax(1e-14 * top).array().log().sum();
  } catch (const NumericalError&) {
    return kInf;
  } catch (const DomainError&) {
    return kInf;
  }
}

ExchangeResult coordinate_exchange(const DesignProblem& problem, const Design& initial,
                                   const Parameter& theta, const ExchangeOptions& options) {
  ExchangeResult result;
  result.design = initial;
  std::sort(result.design.interior.begin(), result.design.interior.end(), point_less);
  double current = design_loss(problem, result.design, theta);
  result.loss_trace.push_back(current);
  if (options.sweeps <= 0 || result.design.interior.empty()) {
    result.design = initial;
    return result;
  }

  const Domain& dom = problem.domain();
  const int dim = dom.dim();
  const int k = std::max(options.candidates_per_coord, 2);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto loss_at = [&](std::size_t idx, int axis, double v) {
    Design d = result.design;
    set_coord(d.interior[idx], axis, v);
    return design_loss(problem, d, theta);
  };

  for (int sweep = 0; sweep < options.sweeps; ++sweep) {
    for (std::size_t idx = 0; idx < result.design.interior.size(); ++idx) {
      for (int axis = 0; axis < dim; ++axis) {
        const auto [lo, hi] = dom.axis_range(result.design.interior[idx], axis);
        const double width = hi - lo;
        if (!(width > 0.0)) continue;
        const double offset = unit(rng);
        std::vector<double> cand(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) cand[static_cast<std::size_t>(c)] = lo + width * (c + offset) / k;
        const std::vector<double> losses =
            parallel_map(cand.size(), options.threads, [&](std::size_t c) { return loss_at(idx, axis, cand[c]); });
        const std::size_t best = static_cast<std::size_t>(
            std::min_element(losses.begin(), losses.end()) - losses.begin());
        double best_v = cand[best];
        double best_loss = losses[best];
        if (std::isfinite(best_loss) && options.refine_iterations > 0) {
          const double margin = 1e-9 * width;
          double a = std::max(lo + margin, best_v - width / k);
          double b = std::min(hi - margin, best_v + width / k);
          const double r = std::numbers::phi - 1.0;
          double c1 = b - r * (b - a);
          double c2 = a + r * (b - a);
          double f1 = loss_at(idx, axis, c1);
          double f2 = loss_at(idx, axis, c2);
          for (int it = 0; it < options.refine_iterations; ++it) {
            if (f1 < f2) {
              b = c2;
              c2 = c1;
              f2 = f1;
              c1 = b - r * (b - a);
              f1 = loss_at(idx, axis, c1);
            } else {
              a = c1;
              c1 = c2;
              f1 = f2;
              c2 = a + r * (b - a);
              f2 = loss_at(idx, axis, c2);
            }
          }
          if (f1 < best_loss) best_v = c1, best_loss = f1;
          if (f2 < best_loss) best_v = c2, best_loss = f2;
        }
        if (best_loss < current) {
          set_coord(result.design.interior[idx], axis, best_v);
          current = best_loss;
        }
      }
    }
    result.loss_trace.push_back(current);
  }
  return result;
}

ExchangeResult warm_start_redesign(const DesignProblem& problem, const Design& previous,
                                   const Parameter& theta_new, int light_sweeps, ExchangeOptions options) {
  options.sweeps = light_sweeps;
  return coordinate_exchange(problem, previous, theta_new, options);
}

std::vector<Point> random_interior(const Domain& domain, int m, std::mt19937_64& rng) {
  std::vector<Point> out;
  const auto [x0, x1] = domain.bounds(0);
  std::uniform_real_distribution<double> ux(x0, x1);
  std::uniform_real_distribution<double> uy(domain.dim() == 2 ? domain.bounds(1).first : 0.0,
                                            domain.dim() == 2 ? domain.bounds(1).second : 0.0);
  while (static_cast<int>(out.size()) < m) {
    Point p{ux(rng), domain.dim() == 2 ? uy(rng) : 0.0};
    if (domain.contains_interior(p)) out.push_back(p);
  }
  return out;
}

double min_separation(const std::vector<Point>& points) {
  double best = kInf;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) best = std::min(best, distance(points[i], points[j]));
  return best;
}

void write_design_csv(const std::string& path, const Design& design, int dim) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(17);
  out << (dim == 1 ? "x1,role\n" : "x1,x2,role\n");
  auto row = [&](Point p, const char* role) {
    out << p.x;
    if (dim == 2) out << ',' << p.y;
    out << ',' << role << '\n';
  };
  for (const Point& p : design.interior) row(p, "interior");
  for (const Point& p : design.boundary) row(p, "boundary");
}

Design read_design_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read design file " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty design file");
  const int dim = line.rfind("x1,x2,role", 0) == 0 ? 2 : (line.rfind("x1,role", 0) == 0 ? 1 : 0);
  if (dim == 0) throw ConfigError(path + ":1: expected header x1[,x2],role");
  Design d;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[3];
    for (int i = 0; i <= dim; ++i)
      if (!std::getline(ss, f[i], ',')) throw ConfigError(path + ":" + std::to_string(lineno) + ": missing field");
    Point p;
    try {
      p.x = std::stod(f[0]);
      if (dim == 2) p.y = std::stod(f[1]);
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad coordinate");
    }
    const std::string& role = f[dim];
    if (role == "interior")
      d.interior.push_back(p);
    else if (role == "boundary")
      d.boundary.push_back(p);
    else
      throw ConfigError(path + ":" + std::to_string(lineno) + ": role must be interior or boundary");
  }
  return d;
}

}  // namespace probmesh
