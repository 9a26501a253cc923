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

#include "probmesh/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace probmesh::oracle {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

template <class F>
double integrate_pieces(F f, std::vector<double> cuts) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-15) continue;
    total += GK::integrate(f, cuts[i], cuts[i + 1], 4, 1e-12);
  }
  return total;
}

std::vector<double> cuts_in_unit(std::initializer_list<double> pts) {
  std::vector<double> out = {0.0, 1.0};
  for (double p : pts)
    if (p > 0.0 && p < 1.0) out.push_back(p);
  return out;
}

enum class Kind { L, I };
struct Functional {
  Kind kind;
  double p;
};

// Dense linear algebra runs in extended precision.
using Real = long double;
using MatR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VecR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

Real se_r(Real r, Real ell) { return std::exp(-r * r / (2 * ell * ell)); }
Real se_d2_r(Real r, Real ell) {
  const Real l2 = ell * ell;
  return (r * r / (l2 * l2) - 1 / l2) * se_r(r, ell);
}
Real se_d4_r(Real r, Real ell) {
  const Real l2 = ell * ell;
  const Real r2 = r * r;
  return (r2 * r2 / (l2 * l2 * l2 * l2) - 6 * r2 / (l2 * l2 * l2) + 3 / (l2 * l2)) * se_r(r, ell);
}

Real cov(const Dense1D& s, Functional f, Functional g) {
  const Real r = static_cast<Real>(f.p) - static_cast<Real>(g.p);
  const Real a = s.a;
  if (f.kind == Kind::L && g.kind == Kind::L) return a * a * se_d4_r(r, s.ell);
  if (f.kind == Kind::L || g.kind == Kind::L) return a * se_d2_r(r, s.ell);
  return se_r(r, s.ell);
}

MatR cov_matrix(const Dense1D& s, const std::vector<Functional>& rows, const std::vector<Functional>& cols) {
  MatR m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov(s, rows[i], cols[j]);
  return m;
}

std::vector<Functional> identities(const std::vector<double>& x) {
  std::vector<Functional> out;
  for (double p : x) out.push_back({Kind::I, p});
  return out;
}

std::vector<Functional> linear_functionals(const Dense1D& s) {
  std::vector<Functional> out;
  for (double p : s.interior) out.push_back({Kind::L, p});
  for (double p : s.boundary) out.push_back({Kind::I, p});
  return out;
}

Real log_density(const VecR& y, const VecR& mean, const MatR& cov) {
  const Eigen::FullPivLU<MatR> lu(cov);
  const MatR inv = lu.inverse();
  const VecR r = y - mean;
  const Real n = static_cast<Real>(y.size());
  return -(n * std::log(2 * std::numbers::pi_v<Real>) + std::log(std::abs(lu.determinant())) + r.dot(inv * r)) / 2;
}

MatR gram(const Dense1D& s) {
  const auto f = linear_functionals(s);
  MatR g = cov_matrix(s, f, f);
  g.diagonal().array() += static_cast<Real>(s.jitter);
  return g;
}

}  // namespace

double green(double x, double z) { return x <= z ? x * (z - 1.0) : z * (x - 1.0); }

double wendland_c0(double r, double eps) {
  const double t = 1.0 - eps * std::abs(r);
  return t > 0.0 ? t * t : 0.0;
}

double natural_kernel_d20(double x, double xp, double eps) {
  const auto f = [&](double z) { return green(xp, z) * wendland_c0(x - z, eps); };
  return integrate_pieces(f, cuts_in_unit({x, xp, x - 1.0 / eps, x + 1.0 / eps}));
}

double natural_kernel(double x, double xp, double eps) {
  // Outer integral over z of G(x, z) h(z), h(z) = int Lambda(z, z') G(x', z') dz'.
  const auto h = [&](double z) {
    const auto g = [&](double zp) { return wendland_c0(z - zp, eps) * green(xp, zp); };
    return integrate_pieces(g, cuts_in_unit({z, xp, z - 1.0 / eps, z + 1.0 / eps}));
  };
  const auto f = [&](double z) { return green(x, z) * h(z); };
  const double w = 1.0 / eps;
  return integrate_pieces(f, cuts_in_unit({x, xp, xp - w, xp + w, w, 1.0 - w}));
}

double se(double r, double ell) { return std::exp(-r * r / (2.0 * ell * ell)); }

double se_d2(double r, double ell) {
  const double l2 = ell * ell;
  return (r * r / (l2 * l2) - 1.0 / l2) * se(r, ell);
}

double se_d4(double r, double ell) {
  const double l2 = ell * ell;
  const double r2 = r * r;
  return (r2 * r2 / (l2 * l2 * l2 * l2) - 6.0 * r2 / (l2 * l2 * l2) + 3.0 / (l2 * l2)) * se(r, ell);
}

double gaussian_log_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  return static_cast<double>(log_density(y.cast<Real>(), mean.cast<Real>(), cov.cast<Real>()));
}

Eigen::MatrixXd dense_gram(const Dense1D& s) { return gram(s).cast<double>(); }

Eigen::MatrixXd dense_cross(const Dense1D& s, const std::vector<double>& points) {
  return cov_matrix(s, identities(points), linear_functionals(s)).cast<double>();
}

double dense_marginal_log_likelihood(const Dense1D& s, const Eigen::VectorXd& data, const std::vector<double>& x,
                                     const Eigen::VectorXd& y, double gamma) {
  const MatR ginv = gram(s).fullPivLu().inverse();
  const MatR c = cov_matrix(s, identities(x), linear_functionals(s));
  const VecR mu = c * ginv * data.cast<Real>();
  MatR sigma = cov_matrix(s, identities(x), identities(x)) - c * ginv * c.transpose();
  sigma.diagonal().array() += static_cast<Real>(gamma) * gamma;
  return static_cast<double>(log_density(y.cast<Real>(), mu, sigma));
}

double linear_latent_log_likelihood(const Dense1D& s, double alpha, const Eigen::VectorXd& g,
                                    const Eigen::VectorXd& b, const std::vector<double>& x,
                                    const Eigen::VectorXd& y, double gamma) {
  std::vector<Functional> f;
  for (double p : s.interior) f.push_back({Kind::L, p});
  for (double p : s.interior) f.push_back({Kind::I, p});
  for (double p : s.boundary) f.push_back({Kind::I, p});
  MatR gm = cov_matrix(s, f, f);
  gm.diagonal().array() += static_cast<Real>(s.jitter);
  const MatR c = cov_matrix(s, identities(x), f);
  const MatR w = c * gm.fullPivLu().inverse();
  const Eigen::Index m = static_cast<Eigen::Index>(s.interior.size());
  const Eigen::Index n = y.size();
  const Real al = alpha;
  // mu(z) = w [z; (g - z) / alpha; b] = c0 + M z
  const MatR big_m = w.leftCols(m) - w.middleCols(m, m) / al;
  const VecR c0 = w.middleCols(m, m) * g.cast<Real>() / al + w.rightCols(b.size()) * b.cast<Real>();
  MatR sm = cov_matrix(s, identities(x), identities(x)) - w * c.transpose();
  sm = ((sm + sm.transpose()) / 2).eval();
  sm.diagonal().array() += static_cast<Real>(gamma) * gamma;
  const MatR sinv = sm.fullPivLu().inverse();
  const MatR h = big_m.transpose() * sinv * big_m;
  const MatR hinv = h.fullPivLu().inverse();
  const VecR r = y.cast<Real>() - c0;
  const MatR proj = sinv - sinv * big_m * hinv * big_m.transpose() * sinv;
  const Real log_det_s = std::log(std::abs(sm.fullPivLu().determinant()));
  const Real log_det_h = std::log(std::abs(h.fullPivLu().determinant()));
  return static_cast<double>(-static_cast<Real>(n - m) * std::log(2 * std::numbers::pi_v<Real>) / 2 - log_det_s / 2 -
                             log_det_h / 2 - r.dot(proj * r) / 2);
}

}  // namespace probmesh::oracle
