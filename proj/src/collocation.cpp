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

#include "probmesh/collocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "probmesh/errors.hpp"

namespace probmesh {

std::vector<Point> Design::all_points() const {
  std::vector<Point> out = interior;
  out.insert(out.end(), boundary.begin(), boundary.end());
  return out;
}

void Design::validate(const Domain& domain) const {
  for (const Point& p : interior)
    if (!domain.contains_interior(p)) throw DomainError("interior design point outside the domain");
  for (const Point& p : boundary)
    if (!domain.on_boundary(p, 1e-9)) throw DomainError("boundary design point off the boundary");
  const std::vector<Point> pts = all_points();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (distance(pts[i], pts[j]) <= 1e-12) throw DomainError("duplicate design points");
}

namespace {

struct OrderTerm {
  int order;
  ThetaAffine coef;
};

std::vector<OrderTerm> order_terms(const LinearForm& f) {
  std::vector<OrderTerm> out;
  if (!f.lap.is_zero()) out.push_back({2, f.lap});
  if (!f.id.is_zero()) out.push_back({0, f.id});
  return out;
}

Eigen::VectorXd coefficient_vector(const ThetaAffine& c, std::span<const Point> pts,
                                   const Parameter& theta) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) v(static_cast<Eigen::Index>(i)) = c.eval(theta.at(pts[i]));
  return v;
}

double min_eigenvalue(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().size() > 0 ? es.eigenvalues()(0) : 0.0;
}

}  // namespace

struct CollocationModel::State {
  KernelSpec kernel;
  OperatorSet operators;
  Design design;
  std::vector<CollocationBlock> blocks;
  std::vector<Eigen::Index> offsets;
  std::size_t n = 0;
  struct Term {
    int lo;
    int ro;
    Eigen::MatrixXd d;
  };
  // pair_terms[a][b] for a <= b
  std::vector<std::vector<std::vector<Term>>> pair_terms;
};

CollocationModel::CollocationModel(KernelSpec kernel, OperatorSet operators, Design design) {
  auto st = std::make_shared<State>();
  st->kernel = std::move(kernel);
  st->operators = std::move(operators);
  st->design = std::move(design);
  const auto add_block = [&](const OperatorDescriptor& op, const std::vector<Point>& pts) {
    if (pts.empty()) return;
    st->blocks.push_back({op, op.linear_form(), pts});
  };
  add_block(st->operators.interior, st->design.interior);
  if (st->operators.identity_block) add_block(OperatorDescriptor::identity(), st->design.interior);
  add_block(st->operators.boundary, st->design.boundary);

  for (const auto& b : st->blocks) {
    st->offsets.push_back(static_cast<Eigen::Index>(st->n));
    st->n += b.points.size();
  }
  const std::size_t nb = st->blocks.size();
  st->pair_terms.assign(nb, std::vector<std::vector<State::Term>>(nb));
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = a; b < nb; ++b) {
      const auto& A = st->blocks[a];
      const auto& B = st->blocks[b];
      for (const OrderTerm& l : order_terms(A.form)) {
        for (const OrderTerm& r : order_terms(B.form)) {
          State::Term t{l.order, r.order, Eigen::MatrixXd(A.points.size(), B.points.size())};
          const bool sym = (a == b) && (l.order == r.order);
          fill_derivative_block(st->kernel, A.points, B.points, l.order, r.order, t.d, sym);
          st->pair_terms[a][b].push_back(std::move(t));
        }
      }
    }
  }
  state_ = std::move(st);
}

const KernelSpec& CollocationModel::kernel() const { return state_->kernel; }
const OperatorSet& CollocationModel::operators() const { return state_->operators; }
const Design& CollocationModel::design() const { return state_->design; }
const std::vector<CollocationBlock>& CollocationModel::blocks() const { return state_->blocks; }
std::size_t CollocationModel::size() const { return state_->n; }

namespace {

double scale_for(const KernelSpec& k, const Parameter& theta) {
  if (k.family() == KernelFamily::NaturalPoisson1D) return k.theta_scale(theta.scalar());
  return 1.0;
}

}  // namespace

Eigen::MatrixXd CollocationModel::gram(const Parameter& theta) const {
  const State& st = *state_;
  const Eigen::Index n = static_cast<Eigen::Index>(st.n);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  const std::size_t nb = st.blocks.size();
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = a; b < nb; ++b) {
      const auto& A = st.blocks[a];
      const auto& B = st.blocks[b];
      auto blk = g.block(st.offsets[a], st.offsets[b], static_cast<Eigen::Index>(A.points.size()),
                         static_cast<Eigen::Index>(B.points.size()));
      for (const auto& t : st.pair_terms[a][b]) {
        const ThetaAffine& lc = t.lo == 2 ? A.form.lap : A.form.id;
        const ThetaAffine& rc = t.ro == 2 ? B.form.lap : B.form.id;
        const Eigen::VectorXd l = coefficient_vector(lc, A.points, theta);
        const Eigen::VectorXd r = coefficient_vector(rc, B.points, theta);
        blk.noalias() += l.asDiagonal() * t.d * r.asDiagonal();
      }
    }
  }
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const auto& A = st.blocks[a];
      const auto& B = st.blocks[b];
      g.block(st.offsets[a], st.offsets[b], static_cast<Eigen::Index>(A.points.size()),
              static_cast<Eigen::Index>(B.points.size())) =
          g.block(st.offsets[b], st.offsets[a], static_cast<Eigen::Index>(B.points.size()),
                  static_cast<Eigen::Index>(A.points.size()))
              .transpose();
    }
  }
  // Diagonal blocks with mixed orders contribute D_{lo,ro} + D_{ro,lo}^T;
  // enforce exact symmetry against round-off.
  g = 0.5 * (g + g.transpose()).eval();
  return scale_for(st.kernel, theta) * g;
}

CollocationPosterior CollocationModel::condition(const Parameter& theta, const Eigen::VectorXd& data,
                                                 double jitter) const {
  const Eigen::Index n = static_cast<Eigen::Index>(size());
  if (data.size() != n) throw DomainError("data vector length does not match the design");
  CollocationPosterior p(*this, theta);
  p.gram_ = gram(theta);
  if (n > 0) {
    const double avg = std::max(p.gram_.trace() / static_cast<double>(n), std::numeric_limits<double>::min());
    double delta = std::max(jitter, 1e-12 * avg);
    const double cap = std::max(jitter, 1e-6 * avg);
    for (;;) {
      Eigen::MatrixXd jittered = p.gram_;
      jittered.diagonal().array() += delta;
      p.factor_.compute(jittered);
      if (p.factor_.info() == Eigen::Success && p.factor_.matrixLLT().diagonal().minCoeff() > 0.0) break;
      if (delta >= cap * (1.0 - 1e-12)) {
        const double lam = min_eigenvalue(p.gram_);
        std::ostringstream os;
        os << "collocation Gram matrix not positive definite (n=" << n
           << ", min eigenvalue " << lam << ") at maximum jitter " << delta;
        throw IllConditionedDesign(os.str(), lam);
      }
      delta = std::min(delta * 10.0, cap);
    }
    p.jitter_ = delta;
  }
  p.data_ = data;
  p.weights_ = n > 0 ? Eigen::VectorXd(p.factor_.solve(data)) : Eigen::VectorXd();
  return p;
}

EvaluationCache CollocationModel::evaluation(std::span<const Point> points,
                                             const OperatorDescriptor& output,
                                             bool full_prior) const {
  const State& st = *state_;
  EvaluationCache c;
  c.points_.assign(points.begin(), points.end());
  c.output_ = output;
  c.form_ = output.linear_form();
  const auto out_terms = order_terms(c.form_);
  c.cross_.resize(st.blocks.size());
  for (std::size_t b = 0; b < st.blocks.size(); ++b) {
    const auto& B = st.blocks[b];
    for (const OrderTerm& l : out_terms) {
      for (const OrderTerm& r : order_terms(B.form)) {
        EvaluationCache::Term t{l.order, r.order, Eigen::MatrixXd(points.size(), B.points.size())};
        fill_derivative_block(st.kernel, points, B.points, l.order, r.order, t.d);
        c.cross_[b].push_back(std::move(t));
      }
    }
  }
  for (const OrderTerm& l : out_terms) {
    for (const OrderTerm& r : out_terms) {
      Eigen::VectorXd diag(static_cast<Eigen::Index>(points.size()));
      for (std::size_t i = 0; i < points.size(); ++i)
        diag(static_cast<Eigen::Index>(i)) = eval_derivative(st.kernel, points[i], points[i], l.order, r.order);
      c.prior_diag_.push_back({{l.order, r.order}, std::move(diag)});
      if (full_prior) {
        Eigen::MatrixXd full(points.size(), points.size());
        fill_derivative_block(st.kernel, points, points, l.order, r.order, full, l.order == r.order);
        c.prior_full_.push_back({{l.order, r.order}, std::move(full)});
      }
    }
  }
  return c;
}

double CollocationPosterior::kernel_scale() const { return scale_for(model_.kernel(), theta_); }

CollocationPosterior CollocationPosterior::with_data(const Eigen::VectorXd& data) const {
  if (data.size() != gram_.rows()) throw DomainError("data vector length does not match the design");
  CollocationPosterior p = *this;
  p.data_ = data;
  p.weights_ = gram_.rows() > 0 ? Eigen::VectorXd(factor_.solve(data)) : Eigen::VectorXd();
  return p;
}

Eigen::MatrixXd CollocationPosterior::cross(const EvaluationCache& cache) const {
  const auto& st = *model_.state_;
  const Eigen::Index nx = static_cast<Eigen::Index>(cache.points_.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nx, static_cast<Eigen::Index>(st.n));
  for (std::size_t b = 0; b < st.blocks.size(); ++b) {
    const auto& B = st.blocks[b];
    auto blk = c.middleCols(st.offsets[b], static_cast<Eigen::Index>(B.points.size()));
    for (const auto& t : cache.cross_[b]) {
      const ThetaAffine& lc = t.out_order == 2 ? cache.form_.lap : cache.form_.id;
      const ThetaAffine& rc = t.block_order == 2 ? B.form.lap : B.form.id;
      const Eigen::VectorXd l = coefficient_vector(lc, cache.points_, theta_);
      const Eigen::VectorXd r = coefficient_vector(rc, B.points, theta_);
      blk.noalias() += l.asDiagonal() * t.d * r.asDiagonal();
    }
  }
  return kernel_scale() * c;
}

Eigen::MatrixXd CollocationPosterior::cross(std::span<const Point> points,
                                            const OperatorDescriptor& output) const {
  return cross(model_.evaluation(points, output, false));
}

Eigen::VectorXd CollocationPosterior::mean(const EvaluationCache& cache) const {
  if (gram_.rows() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cache.points_.size()));
  return cross(cache) * weights_;
}

Eigen::VectorXd CollocationPosterior::mean(std::span<const Point> points,
                                           const OperatorDescriptor& output) const {
  return mean(model_.evaluation(points, output, false));
}

Eigen::MatrixXd CollocationPosterior::prior_cov(const EvaluationCache& cache) const {
  if (cache.prior_full_.empty()) throw DomainError("evaluation cache has no full prior block");
  const Eigen::Index nx = static_cast<Eigen::Index>(cache.points_.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nx, nx);
  for (const auto& [orders, d] : cache.prior_full_) {
    const ThetaAffine& lc = orders.first == 2 ? cache.form_.lap : cache.form_.id;
    const ThetaAffine& rc = orders.second == 2 ? cache.form_.lap : cache.form_.id;
    const Eigen::VectorXd l = coefficient_vector(lc, cache.points_, theta_);
    const Eigen::VectorXd r = coefficient_vector(rc, cache.points_, theta_);
    k.noalias() += l.asDiagonal() * d * r.asDiagonal();
  }
  k = 0.5 * (k + k.transpose()).eval();
  return kernel_scale() * k;
}

Eigen::VectorXd CollocationPosterior::prior_variance(const EvaluationCache& cache) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cache.points_.size()));
  for (const auto& [orders, d] : cache.prior_diag_) {
    const ThetaAffine& lc = orders.first == 2 ? cache.form_.lap : cache.form_.id;
    const ThetaAffine& rc = orders.second == 2 ? cache.form_.lap : cache.form_.id;
    const Eigen::VectorXd l = coefficient_vector(lc, cache.points_, theta_);
    const Eigen::VectorXd r = coefficient_vector(rc, cache.points_, theta_);
    v.array() += l.array() * d.array() * r.array();
  }
  return kernel_scale() * v;
}

Eigen::VectorXd CollocationPosterior::clamp_variance(Eigen::VectorXd var,
                                                     const Eigen::VectorXd& prior) const {
  for (Eigen::Index i = 0; i < var.size(); ++i) {
    if (var(i) >= 0.0) continue;
    const double tol = 1e-10 * std::max(1.0, std::abs(prior(i)));
    if (var(i) < -tol) {
      std::ostringstream os;
      os << "negative predictive variance " << var(i) << " (prior " << prior(i) << ")";
      throw NumericalError(os.str());
    }
    var(i) = 0.0;
  }
  return var;
}

Eigen::MatrixXd CollocationPosterior::cov(const EvaluationCache& cache) const {
  Eigen::MatrixXd k = prior_cov(cache);
  if (gram_.rows() > 0) {
    const Eigen::MatrixXd v = factor_.matrixL().solve(cross(cache).transpose());
    k.noalias() -= v.transpose() * v;
  }
  k = 0.5 * (k + k.transpose()).eval();
  const Eigen::VectorXd d = clamp_variance(k.diagonal(), prior_variance(cache));
  k.diagonal() = d;
  return k;
}

Eigen::MatrixXd CollocationPosterior::cov(std::span<const Point> points) const {
  return cov(model_.evaluation(points));
}

Eigen::VectorXd CollocationPosterior::variance(const EvaluationCache& cache) const {
  const Eigen::VectorXd prior = prior_variance(cache);
  Eigen::VectorXd v = prior;
  if (gram_.rows() > 0) {
    const Eigen::MatrixXd w = factor_.matrixL().solve(cross(cache).transpose());
    v -= w.colwise().squaredNorm().transpose();
  }
  return clamp_variance(std::move(v), prior);
}

Eigen::VectorXd CollocationPosterior::variance(std::span<const Point> points) const {
  return variance(model_.evaluation(points, OperatorDescriptor::identity(), false));
}

Eigen::MatrixXd CollocationPosterior::sample(std::span<const Point> points, std::uint64_t seed,
                                             int count) const {
  if (count < 1) throw DomainError("sample count must be at least 1");
  const EvaluationCache cache = model_.evaluation(points);
  const Eigen::VectorXd mu = mean(cache);
  const Eigen::MatrixXd sigma = cov(cache);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = es.eigenvectors() * root.asDiagonal();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(count, mu.size());
  Eigen::VectorXd xi(mu.size());
  for (int s = 0; s < count; ++s) {
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi(j) = normal(rng);
    out.row(s) = (mu + factor * xi).transpose();
  }
  return out;
}

Eigen::MatrixXd CollocationPosterior::solve(const Eigen::MatrixXd& m) const { return factor_.solve(m); }

CollocationPosterior assemble(const KernelSpec& kernel, const OperatorSet& operators,
                              const Design& design, const Eigen::VectorXd& g,
                              const Eigen::VectorXd& b, const Parameter& theta, double jitter) {
  if (operators.identity_block) throw ConfigError("assemble expects a linear operator set");
  if (g.size() != static_cast<Eigen::Index>(design.interior.size()) ||
      b.size() != static_cast<Eigen::Index>(design.boundary.size()))
    throw DomainError("data lengths do not match the design");
  CollocationModel model(kernel, operators, design);
  Eigen::VectorXd data(g.size() + b.size());
  data << g, b;
  return model.condition(theta, data, jitter);
}

double fill_distance(const Design& design, std::span<const Point> candidate_grid) {
  const std::vector<Point> pts = design.all_points();
  if (pts.empty()) throw DomainError("fill distance of an empty design");
  double h = 0.0;
  for (const Point& x : candidate_grid) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : pts) best = std::min(best, squared_distance(x, p));
    h = std::max(h, best);
  }
  return std::sqrt(h);
}

std::vector<Point> fill_distance_grid(const Domain& domain) {
  return domain.grid(domain.dim() == 1 ? 10000 : 100);
}

ErrorBoundReport local_error_bound_check(const CollocationPosterior& p,
                                         const Eigen::VectorXd& coefficients,
                                         std::span<const Point> rep_points,
                                         std::span<const Point> test_points) {
  if (coefficients.size() != static_cast<Eigen::Index>(rep_points.size()))
    throw DomainError("one coefficient per representer point required");
  const CollocationModel& model = p.model();
  const KernelSpec& k = model.kernel();
  const OperatorDescriptor id = OperatorDescriptor::identity();

  ErrorBoundReport rep;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < rep_points.size(); ++i)
    for (std::size_t j = 0; j < rep_points.size(); ++j)
      norm2 += coefficients(static_cast<Eigen::Index>(i)) * coefficients(static_cast<Eigen::Index>(j)) *
               eval_operator_kernel(k, id, id, rep_points[i], rep_points[j], p.theta());
  rep.norm = std::sqrt(std::max(norm2, 0.0));

  Eigen::VectorXd data(static_cast<Eigen::Index>(model.size()));
  Eigen::Index row = 0;
  for (const CollocationBlock& b : model.blocks()) {
    for (const Point& x : b.points) {
      double v = 0.0;
      for (std::size_t j = 0; j < rep_points.size(); ++j)
        v += coefficients(static_cast<Eigen::Index>(j)) * eval_operator_kernel(k, b.op, id, x, rep_points[j], p.theta());
      data(row++) = v;
    }
  }
  const CollocationPosterior q = p.with_data(data);
  const EvaluationCache cache = model.evaluation(test_points, id, false);
  const Eigen::VectorXd mu = q.mean(cache);
  const Eigen::VectorXd var = q.variance(cache);
  for (std::size_t i = 0; i < test_points.size(); ++i) {
    double u0 = 0.0;
    for (std::size_t j = 0; j < rep_points.size(); ++j)
      u0 += coefficients(static_cast<Eigen::Index>(j)) * eval_operator_kernel(k, id, id, test_points[i], rep_points[j], p.theta());
    const double err = std::abs(mu(static_cast<Eigen::Index>(i)) - u0);
    const double bound = std::sqrt(var(static_cast<Eigen::Index>(i))) * rep.norm;
    const double viol = std::max(0.0, err - bound);
    rep.max_error = std::max(rep.max_error, err);
    rep.max_violation = std::max(rep.max_violation, viol);
    if (viol > 1e-8) ++rep.violations;
  }
  return rep;
}

}  // namespace probmesh
