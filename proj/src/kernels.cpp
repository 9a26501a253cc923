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

#include "probmesh/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "probmesh/errors.hpp"
#include "probmesh/green1d.hpp"
#include "probmesh/quadrature.hpp"
#include "probmesh/simd/rows.hpp"

namespace probmesh {

std::string family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::WendlandC0:
      return "wendland_c0";
    case KernelFamily::WendlandC2:
      return "wendland_c2";
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
    case KernelFamily::NaturalPoisson1D:
      return "natural_poisson_1d";
    case KernelFamily::IntegralType:
      return "integral";
  }
  return "unknown";
}

KernelFamily parse_family(const std::string& name) {
  for (KernelFamily f : {KernelFamily::WendlandC0, KernelFamily::WendlandC2,
                         KernelFamily::SquaredExponential, KernelFamily::NaturalPoisson1D,
                         KernelFamily::IntegralType}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown kernel family '" + name + "'");
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

bool is_radial(KernelFamily f) {
  return f == KernelFamily::WendlandC0 || f == KernelFamily::WendlandC2 ||
         f == KernelFamily::SquaredExponential;
}

simd::RadialWeights weights_for(int lo, int ro) {
  simd::RadialWeights w;
  w.c22 = (lo == 2 && ro == 2) ? 1.0 : 0.0;
  w.c2 = ((lo == 2) != (ro == 2)) ? 1.0 : 0.0;
  w.c00 = (lo == 0 && ro == 0) ? 1.0 : 0.0;
  return w;
}

// Radial base kernel against a row of points; `order` is the total
// Laplacian order (0, 2 or 4) split as the caller needs.
void radial_row(const KernelSpec& spec, Point anchor, simd::PointRow row, int lo, int ro,
                double* out) {
  const simd::RadialWeights w = weights_for(lo, ro);
  switch (spec.family()) {
    case KernelFamily::SquaredExponential:
      simd::sqexp_row(spec.length_scale(), spec.dim(), anchor, row, w, out);
      return;
    case KernelFamily::WendlandC2:
      simd::wendland_c2_row(spec.support_scale(), spec.dim(), anchor, row, w, out);
      return;
    case KernelFamily::WendlandC0:
      simd::wendland_c0_row(spec.support_scale(), anchor, row, 1.0, out);
      return;
    default:
      throw ConfigError("radial row requested for a non-radial kernel");
  }
}

double radial_scalar(const KernelSpec& spec, Point x, Point xp, int lo, int ro) {
  const double r2 = squared_distance(x, xp);
  const simd::RadialWeights w = weights_for(lo, ro);
  switch (spec.family()) {
    case KernelFamily::SquaredExponential: {
      const double ell = spec.length_scale();
      return simd::scalar::sqexp(r2, 1.0 / (ell * ell), spec.dim(), w);
    }
    case KernelFamily::WendlandC2:
      return simd::scalar::wendland_c2(r2, spec.support_scale(), spec.dim(), w);
    case KernelFamily::WendlandC0:
      return simd::scalar::wendland_c0(r2, spec.support_scale());
    default:
      throw ConfigError("radial evaluation requested for a non-radial kernel");
  }
}

double integral_derivative(const KernelSpec& base, Point x, Point xp, int lo, int ro, int order) {
  const Domain& dom = base.domain();
  if (!dom.is_box()) throw ConfigError("integral-type kernels need a box domain");
  if (dom.dim() == 1) {
    const auto [a, b] = dom.bounds(0);
    std::vector<double> cuts = {a, b, x.x, xp.x};
    if (base.family() != KernelFamily::SquaredExponential) {
      const double reach = 1.0 / base.support_scale();
      for (double c : {x.x - reach, x.x + reach, xp.x - reach, xp.x + reach}) cuts.push_back(c);
    }
    std::erase_if(cuts, [&](double c) { return c < a || c > b; });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const QuadratureRule& rule = gauss_legendre(order);
    const std::size_t n = rule.nodes.size();
    std::vector<double> z(n), left(n), right(n);
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double z0 = cuts[s];
      const double z1 = cuts[s + 1];
      if (!(z1 > z0)) continue;
      const double half = 0.5 * (z1 - z0);
      const double mid = 0.5 * (z0 + z1);
      for (std::size_t q = 0; q < n; ++q) z[q] = mid + half * rule.nodes[q];
      const simd::PointRow row{z.data(), nullptr, n};
      radial_row(base, x, row, lo, 0, left.data());
      radial_row(base, xp, row, ro, 0, right.data());
      double piece = 0.0;
      for (std::size_t q = 0; q < n; ++q) piece += rule.weights[q] * (left[q] * right[q]);
      total += half * piece;
    }
    return total;
  }

  // 2D: tensor-product rule over the box.
  const QuadratureRule& rule = gauss_legendre(order);
  const std::size_t n = rule.nodes.size();
  const auto [ax, bx] = dom.bounds(0);
  const auto [ay, by] = dom.bounds(1);
  const double hx = 0.5 * (bx - ax);
  const double hy = 0.5 * (by - ay);
  std::vector<double> zx(n * n), zy(n * n), w(n * n), left(n * n), right(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      zx[i * n + j] = 0.5 * (ax + bx) + hx * rule.nodes[i];
      zy[i * n + j] = 0.5 * (ay + by) + hy * rule.nodes[j];
      w[i * n + j] = rule.weights[i] * rule.weights[j];
    }
  }
  const simd::PointRow row{zx.data(), zy.data(), n * n};
  radial_row(base, x, row, lo, 0, left.data());
  radial_row(base, xp, row, ro, 0, right.data());
  double total = 0.0;
  for (std::size_t q = 0; q < n * n; ++q) total += w[q] * (left[q] * right[q]);
  return hx * hy * total;
}

void check_orders(const KernelSpec& spec, int lo, int ro) {
  if ((lo != 0 && lo != 2) || (ro != 0 && ro != 2))
    throw UnsupportedOperator("Laplacian orders must be 0 or 2");
  if (!spec.supports(lo, ro))
    throw UnsupportedOperator("operator orders (" + std::to_string(lo) + ", " +
                              std::to_string(ro) + ") exceed the smoothness of " +
                              family_name(spec.family()));
}

}  // namespace

KernelSpec KernelSpec::wendland_c0(double support_scale, Domain domain) {
  require_positive(support_scale, "support scale");
  KernelSpec k;
  k.family_ = KernelFamily::WendlandC0;
  k.domain_ = domain;
  k.support_scale_ = support_scale;
  return k;
}

KernelSpec KernelSpec::wendland_c2(double support_scale, Domain domain) {
  require_positive(support_scale, "support scale");
  KernelSpec k;
  k.family_ = KernelFamily::WendlandC2;
  k.domain_ = domain;
  k.support_scale_ = support_scale;
  return k;
}

KernelSpec KernelSpec::squared_exponential(double length_scale, Domain domain) {
  require_positive(length_scale, "length scale");
  KernelSpec k;
  k.family_ = KernelFamily::SquaredExponential;
  k.domain_ = domain;
  k.length_scale_ = length_scale;
  return k;
}

KernelSpec KernelSpec::natural_poisson_1d(double support_scale) {
  require_positive(support_scale, "support scale");
  KernelSpec k;
  k.family_ = KernelFamily::NaturalPoisson1D;
  k.domain_ = Domain::unit_interval();
  k.support_scale_ = support_scale;
  return k;
}

KernelSpec KernelSpec::integral(const KernelSpec& base, int quadrature_order) {
  if (!is_radial(base.family()))
    throw ConfigError("integral-type kernel needs a radial base kernel");
  if (!base.domain().is_box()) throw ConfigError("integral-type kernels need a box domain");
  KernelSpec k;
  k.family_ = KernelFamily::IntegralType;
  k.domain_ = base.domain();
  k.support_scale_ = base.support_scale();
  k.length_scale_ = base.length_scale();
  if (quadrature_order <= 0) quadrature_order = base.dim() == 1 ? 40 : 20;
  if (quadrature_order < 2) throw ConfigError("quadrature order must be at least 2");
  k.quadrature_order_ = quadrature_order;
  k.base_ = std::make_shared<const KernelSpec>(base);
  return k;
}

const KernelSpec& KernelSpec::base() const {
  if (!base_) throw ConfigError("kernel has no base (not integral-type)");
  return *base_;
}

KernelSpec KernelSpec::with_length_scale(double length_scale) const {
  if (family_ == KernelFamily::SquaredExponential) return squared_exponential(length_scale, domain_);
  if (family_ == KernelFamily::IntegralType && base_->family() == KernelFamily::SquaredExponential)
    return integral(base_->with_length_scale(length_scale), quadrature_order_);
  throw ConfigError("kernel " + family_name(family_) + " has no length scale");
}

bool KernelSpec::supports(int lo, int ro) const {
  switch (family_) {
    case KernelFamily::WendlandC0:
      return lo == 0 && ro == 0;
    case KernelFamily::WendlandC2:
      return lo + ro <= 2;
    case KernelFamily::SquaredExponential:
    case KernelFamily::NaturalPoisson1D:
      return true;
    case KernelFamily::IntegralType:
      return base_->supports(lo, 0) && base_->supports(ro, 0);
  }
  return false;
}

double KernelSpec::theta_scale(double theta) const {
  if (family_ == KernelFamily::NaturalPoisson1D) return 1.0 / (theta * theta);
  return 1.0;
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os << family_name(family_);
  if (family_ == KernelFamily::IntegralType) {
    os << "[" << base_->describe() << ", q=" << quadrature_order_ << "]";
  } else if (family_ == KernelFamily::SquaredExponential) {
    os << "(ell=" << length_scale_ << ")";
  } else {
    os << "(eps=" << support_scale_ << ")";
  }
  return os.str();
}

double eval_kernel(const KernelSpec& spec, Point x, Point xp) {
  return eval_derivative(spec, x, xp, 0, 0);
}

double eval_derivative(const KernelSpec& spec, Point x, Point xp, int lo, int ro) {
  check_orders(spec, lo, ro);
  switch (spec.family()) {
    case KernelFamily::WendlandC0:
    case KernelFamily::WendlandC2:
    case KernelFamily::SquaredExponential:
      return radial_scalar(spec, x, xp, lo, ro);
    case KernelFamily::NaturalPoisson1D: {
      const double eps = spec.support_scale();
      if (lo == 0 && ro == 0) return green1d::natural_kernel_poisson_1d(x.x, xp.x, eps, 1.0);
      if (lo == 2 && ro == 0) return green1d::natural_kernel_d20(x.x, xp.x, eps);
      if (lo == 0 && ro == 2) return green1d::natural_kernel_d20(xp.x, x.x, eps);
      return green1d::wendland_c0(x.x, xp.x, eps);
    }
    case KernelFamily::IntegralType:
      return integral_derivative(spec.base(), x, xp, lo, ro, spec.quadrature_order());
  }
  throw ConfigError("unknown kernel family");
}

double eval_operator_kernel(const KernelSpec& spec, const OperatorDescriptor& left,
                            const OperatorDescriptor& right, Point x, Point xp,
                            const Parameter& theta) {
  const LinearForm lf = left.linear_form();
  const LinearForm rf = right.linear_form();
  const double tx = theta.at(x);
  const double txp = theta.at(xp);
  double scale = 1.0;
  if (spec.family() == KernelFamily::NaturalPoisson1D) scale = spec.theta_scale(theta.scalar());
  double total = 0.0;
  const std::array<std::pair<const ThetaAffine*, int>, 2> lterms{{{&lf.lap, 2}, {&lf.id, 0}}};
  const std::array<std::pair<const ThetaAffine*, int>, 2> rterms{{{&rf.lap, 2}, {&rf.id, 0}}};
  for (const auto& [lc, lo] : lterms) {
    if (lc->is_zero()) continue;
    for (const auto& [rc, ro] : rterms) {
      if (rc->is_zero()) continue;
      total += lc->eval(tx) * rc->eval(txp) * eval_derivative(spec, x, xp, lo, ro);
    }
  }
  return scale * total;
}

double eval_integral_kernel(const KernelSpec& base, Point x, Point xp, int quadrature_order) {
  if (quadrature_order < 2) throw ConfigError("quadrature order must be at least 2");
  return integral_derivative(base, x, xp, 0, 0, quadrature_order);
}

void fill_derivative_block(const KernelSpec& spec, std::span<const Point> rows,
                           std::span<const Point> cols, int lo, int ro,
                           Eigen::Ref<Eigen::MatrixXd> out, bool symmetric) {
  check_orders(spec, lo, ro);
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(cols.size());
  if (out.rows() != nr || out.cols() != nc) throw DomainError("derivative block has wrong shape");
  if (symmetric && (nr != nc || lo != ro)) throw DomainError("symmetric block must be square");

  if (is_radial(spec.family())) {
    std::vector<double> xs(cols.size()), ys(cols.size()), buf(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      xs[j] = cols[j].x;
      ys[j] = cols[j].y;
    }
    for (Eigen::Index i = 0; i < nr; ++i) {
      const std::size_t start = symmetric ? static_cast<std::size_t>(i) : 0;
      const simd::PointRow row{xs.data() + start, ys.data() + start, cols.size() - start};
      radial_row(spec, rows[static_cast<std::size_t>(i)], row, lo, ro, buf.data());
      for (std::size_t j = start; j < cols.size(); ++j) out(i, static_cast<Eigen::Index>(j)) = buf[j - start];
    }
  } else {
    for (Eigen::Index i = 0; i < nr; ++i) {
      for (Eigen::Index j = symmetric ? i : 0; j < nc; ++j) {
        out(i, j) = eval_derivative(spec, rows[static_cast<std::size_t>(i)],
                                    cols[static_cast<std::size_t>(j)], lo, ro);
      }
    }
  }
  if (symmetric) {
    for (Eigen::Index i = 0; i < nr; ++i)
      for (Eigen::Index j = 0; j < i; ++j) out(i, j) = out(j, i);
  }
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Point> points) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  fill_derivative_block(spec, points, points, 0, 0, k, true);
  return k;
}

}  // namespace probmesh
