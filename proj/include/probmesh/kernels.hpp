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

#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "probmesh/geometry.hpp"
#include "probmesh/operators.hpp"

namespace probmesh {

enum class KernelFamily {
  WendlandC0,          // (1 - eps r)_+^2
  WendlandC2,          // (1 - eps r)_+^4 (4 eps r + 1)
  SquaredExponential,  // exp(-r^2 / (2 ell^2))
  NaturalPoisson1D,    // Green's-function kernel of theta u'' = g on (0, 1)
  IntegralType,        // int_D k(x, z) k(z, x') dz over a base kernel
};

std::string family_name(KernelFamily f);
/// Accepts the names produced by family_name(); throws ConfigError otherwise.
KernelFamily parse_family(const std::string& name);

/// Immutable positive-definite kernel with hyperparameters.
class KernelSpec {
 public:
  static KernelSpec wendland_c0(double support_scale, Domain domain);
  static KernelSpec wendland_c2(double support_scale, Domain domain);
  static KernelSpec squared_exponential(double length_scale, Domain domain);
  static KernelSpec natural_poisson_1d(double support_scale);
  /// quadrature_order <= 0 picks the default (40 nodes per smooth piece in
  /// 1D, a 20 x 20 tensor rule in 2D).
  static KernelSpec integral(const KernelSpec& base, int quadrature_order = 0);

  KernelFamily family() const { return family_; }
  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  double support_scale() const { return support_scale_; }
  double length_scale() const { return length_scale_; }
  int quadrature_order() const { return quadrature_order_; }
  /// Base kernel of an IntegralType spec; throws otherwise.
  const KernelSpec& base() const;

  /// Copy with a new length scale (squared exponential, possibly as the base
  /// of an integral kernel).
  KernelSpec with_length_scale(double length_scale) const;

  /// Whether Laplacian orders (0 or 2) in each argument are available in
  /// closed form.
  bool supports(int left_order, int right_order) const;

  /// Multiplicative theta dependence of the kernel itself (theta^-2 for the
  /// natural kernel, 1 otherwise).
  double theta_scale(double theta) const;

  std::string describe() const;

 private:
  KernelFamily family_ = KernelFamily::SquaredExponential;
  Domain domain_ = Domain::unit_interval();
  double support_scale_ = 0.0;
  double length_scale_ = 0.0;
  int quadrature_order_ = 0;
  std::shared_ptr<const KernelSpec> base_;
};

/// k(x, x') at theta = 1.
double eval_kernel(const KernelSpec& spec, Point x, Point xp);

/// Derivative block D_{lo,ro}(x, x'): Laplacian^(lo/2) in x and
/// Laplacian^(ro/2) in x', theta = 1. lo, ro in {0, 2}.
double eval_derivative(const KernelSpec& spec, Point x, Point xp, int left_order, int right_order);

/// (L L' k)(x, x') with L acting on x and L' on x'.
double eval_operator_kernel(const KernelSpec& spec, const OperatorDescriptor& left,
                            const OperatorDescriptor& right, Point x, Point xp,
                            const Parameter& theta);

/// int_D base(x, z) base(z, x') dz by Gauss-Legendre quadrature. In 1D the
/// interval is split at the kinks of the base kernel and each piece gets
/// `quadrature_order` nodes; in 2D a tensor rule is used.
double eval_integral_kernel(const KernelSpec& base, Point x, Point xp, int quadrature_order);

/// out(i, j) = D_{lo,ro}(rows[i], cols[j]). Radial families go through the
/// SIMD row kernels. When `symmetric` is set rows and cols must be the same
/// points and lo == ro; only the upper triangle is evaluated and mirrored.
void fill_derivative_block(const KernelSpec& spec, std::span<const Point> rows,
                           std::span<const Point> cols, int left_order, int right_order,
                           Eigen::Ref<Eigen::MatrixXd> out, bool symmetric = false);

/// K(X) at theta = 1.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Point> points);

}  // namespace probmesh
