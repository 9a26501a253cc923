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

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "probmesh/errors.hpp"
#include "probmesh/green1d.hpp"
#include "probmesh/kernels.hpp"

namespace probmesh {
namespace {

const Domain kUnit = Domain::unit_interval();
const Domain kSquare = Domain::unit_square();

std::vector<KernelSpec> all_families_1d() {
  return {KernelSpec::wendland_c0(2.5, kUnit), KernelSpec::wendland_c2(2.5, kUnit),
          KernelSpec::squared_exponential(0.2, kUnit), KernelSpec::natural_poisson_1d(2.5),
          KernelSpec::integral(KernelSpec::wendland_c2(2.5, kUnit))};
}

double wendland_c2_1d(double r, double eps) {
  const double t = 1.0 - eps * std::abs(r);
  return t > 0.0 ? t * t * t * t * (4.0 * eps * std::abs(r) + 1.0) : 0.0;
}

TEST(Kernels, WendlandC0Values) {
  const KernelSpec k = KernelSpec::wendland_c0(2.5, kUnit);
  EXPECT_DOUBLE_EQ(eval_kernel(k, {0.3}, {0.3}), 1.0);
  EXPECT_EQ(eval_kernel(k, {0.0}, {0.5}), 0.0);
  EXPECT_NEAR(eval_kernel(k, {0.0}, {0.2}), 0.25, 1e-15);
}

TEST(Kernels, WendlandVanishOutsideSupport) {
  for (const KernelSpec& k : {KernelSpec::wendland_c0(2.5, kUnit), KernelSpec::wendland_c2(2.5, kUnit)}) {
    EXPECT_EQ(eval_kernel(k, {0.1}, {0.5}), 0.0);
    EXPECT_EQ(eval_kernel(k, {0.1}, {0.9}), 0.0);
  }
}

TEST(Kernels, SymmetricBitwise) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const KernelSpec& k : all_families_1d())
    for (int i = 0; i < 100; ++i) {
      const Point a{u(rng)}, b{u(rng)};
      EXPECT_EQ(eval_kernel(k, a, b), eval_kernel(k, b, a)) << k.describe();
    }
  for (const KernelSpec& k : {KernelSpec::wendland_c2(1.5, kSquare), KernelSpec::squared_exponential(0.3, kSquare)})
    for (int i = 0; i < 100; ++i) {
      const Point a{u(rng), u(rng)}, b{u(rng), u(rng)};
      EXPECT_EQ(eval_kernel(k, a, b), eval_kernel(k, b, a)) << k.describe();
    }
}

TEST(Kernels, PositiveOnDiagonal) {
  for (const KernelSpec& k : all_families_1d())
    for (double x : {0.1, 0.37, 0.5, 0.93}) EXPECT_GT(eval_kernel(k, {x}, {x}), 0.0) << k.describe();
}

TEST(Kernels, IdentityOperatorsMatchKernel) {
  const auto id = OperatorDescriptor::identity();
  for (const KernelSpec& k : all_families_1d())
    EXPECT_DOUBLE_EQ(eval_operator_kernel(k, id, id, {0.3}, {0.45}, Parameter(1.7)),
                     eval_kernel(k, {0.3}, {0.45}) * k.theta_scale(1.7));
}

TEST(Kernels, SquaredExponentialLaplacianAtZero) {
  const KernelSpec k = KernelSpec::squared_exponential(1.0, Domain::interval(-1.0, 1.0));
  const double v = eval_operator_kernel(k, OperatorDescriptor::laplacian(), OperatorDescriptor::identity(), {0.0},
                                        {0.0}, Parameter(1.0));
  EXPECT_NEAR(v, -1.0, 1e-15);
  const double h = 1e-4;
  const double fd = (eval_kernel(k, {h}, {0.0}) - 2.0 * eval_kernel(k, {0.0}, {0.0}) + eval_kernel(k, {-h}, {0.0})) / (h * h);
  EXPECT_NEAR(fd, -1.0, 1e-6);
}

TEST(Kernels, NaturalKernelScaledLaplacianPairIsLambda) {
  const KernelSpec k = KernelSpec::natural_poisson_1d(2.5);
  const auto a = OperatorDescriptor::scaled_laplacian(Coefficient::theta());
  for (double theta : {0.5, 1.0, 3.0})
    for (auto [x, xp] : {std::pair{0.1, 0.2}, std::pair{0.3, 0.9}, std::pair{0.5, 0.55}})
      EXPECT_NEAR(eval_operator_kernel(k, a, a, {x}, {xp}, Parameter(theta)), green1d::wendland_c0(x, xp, 2.5), 1e-12);
}

TEST(Kernels, LaplacianMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const double h = 1e-4;
  for (const KernelSpec& k : {KernelSpec::squared_exponential(0.2, kUnit), KernelSpec::wendland_c2(2.5, kUnit)}) {
    int checked = 0;
    while (checked < 50) {
      const double x = u(rng), xp = u(rng);
      const double r = std::abs(x - xp);
      if (k.family() == KernelFamily::WendlandC2 && (r < 1e-2 || std::abs(r - 0.4) < 1e-2)) continue;
      const double d = eval_derivative(k, {x}, {xp}, 2, 0);
      const double fd = (eval_kernel(k, {x + h}, {xp}) - 2.0 * eval_kernel(k, {x}, {xp}) + eval_kernel(k, {x - h}, {xp})) / (h * h);
      EXPECT_NEAR(d, fd, 1e-5 * std::max(1.0, std::abs(d))) << k.describe() << " x=" << x << " xp=" << xp;
      ++checked;
    }
  }
}

TEST(Kernels, SlotOrderCommutes) {
  const KernelSpec k = KernelSpec::squared_exponential(0.3, kSquare);
  const auto lap = OperatorDescriptor::laplacian();
  const auto a1 = OperatorDescriptor::linear_combination(
      {{Coefficient::theta(-1.0), OperatorDescriptor::laplacian()}, {Coefficient::inverse_theta(-1.0), OperatorDescriptor::identity()}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Point x{u(rng), u(rng)}, xp{u(rng), u(rng)};
    EXPECT_NEAR(eval_operator_kernel(k, a1, lap, x, xp, Parameter(0.3)), eval_operator_kernel(k, lap, a1, xp, x, Parameter(0.3)),
                1e-9 * std::max(1.0, std::abs(eval_operator_kernel(k, a1, lap, x, xp, Parameter(0.3)))));
  }
}

TEST(Kernels, UnsupportedOrderThrows) {
  const KernelSpec c0 = KernelSpec::wendland_c0(2.5, kUnit);
  EXPECT_THROW(eval_derivative(c0, {0.2}, {0.3}, 2, 0), UnsupportedOperator);
  const KernelSpec c2 = KernelSpec::wendland_c2(2.5, kUnit);
  EXPECT_THROW(eval_derivative(c2, {0.2}, {0.3}, 2, 2), UnsupportedOperator);
  EXPECT_FALSE(c2.supports(2, 2));
  EXPECT_TRUE(c2.supports(2, 0));
}

TEST(Kernels, ParseFamilyRoundTrip) {
  for (KernelFamily f : {KernelFamily::WendlandC0, KernelFamily::WendlandC2, KernelFamily::SquaredExponential,
                         KernelFamily::NaturalPoisson1D, KernelFamily::IntegralType})
    EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("matern"), ConfigError);
}

TEST(Kernels, GramSymmetricPsd) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const KernelSpec& k : all_families_1d()) {
    std::vector<Point> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({u(rng)});
    const Eigen::MatrixXd g = gram_matrix(k, pts);
    EXPECT_EQ((g - g.transpose()).cwiseAbs().maxCoeff(), 0.0) << k.describe();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-10 * ev.maxCoeff()) << k.describe();
  }
}

TEST(IntegralKernel, MatchesAdaptiveQuadrature) {
  const KernelSpec base = KernelSpec::wendland_c2(2.5, kUnit);
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  for (auto [x, xp] : {std::pair{0.5, 0.5}, std::pair{0.2, 0.45}, std::pair{0.05, 0.3}}) {
    const auto f = [&](double z) { return wendland_c2_1d(x - z, 2.5) * wendland_c2_1d(z - xp, 2.5); };
    std::vector<double> cuts = {0.0, 1.0};
    for (double c : {x, xp, x - 0.4, x + 0.4, xp - 0.4, xp + 0.4})
      if (c > 0.0 && c < 1.0) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    double ref = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) ref += GK::integrate(f, cuts[i], cuts[i + 1], 8, 1e-13);
    EXPECT_NEAR(eval_integral_kernel(base, {x}, {xp}, 40), ref, 1e-8);
  }
  EXPECT_GT(eval_integral_kernel(base, {0.5}, {0.5}, 40), 0.0);
}

TEST(IntegralKernel, SymmetricAndDisjointSupport) {
  const KernelSpec base = KernelSpec::wendland_c2(2.5, kUnit);
  EXPECT_EQ(eval_integral_kernel(base, {0.2}, {0.7}, 40), eval_integral_kernel(base, {0.7}, {0.2}, 40));
  EXPECT_EQ(eval_integral_kernel(KernelSpec::wendland_c2(10.0, kUnit), {0.05}, {0.95}, 40), 0.0);
}

TEST(IntegralKernel, QuadratureOrderConverges) {
  const KernelSpec base = KernelSpec::squared_exponential(0.2, kUnit);
  for (auto [x, xp] : {std::pair{0.1, 0.4}, std::pair{0.5, 0.5}, std::pair{0.8, 0.3}})
    EXPECT_NEAR(eval_integral_kernel(base, {x}, {xp}, 20), eval_integral_kernel(base, {x}, {xp}, 40), 1e-6);
  const KernelSpec base2 = KernelSpec::squared_exponential(0.3, kSquare);
  EXPECT_NEAR(eval_integral_kernel(base2, {0.3, 0.4}, {0.6, 0.5}, 12), eval_integral_kernel(base2, {0.3, 0.4}, {0.6, 0.5}, 24),
              1e-6);
}

TEST(Kernels, ThetaScale) {
  EXPECT_DOUBLE_EQ(KernelSpec::natural_poisson_1d(2.5).theta_scale(2.0), 0.25);
  EXPECT_DOUBLE_EQ(KernelSpec::squared_exponential(0.2, kUnit).theta_scale(2.0), 1.0);
}

}  // namespace
}  // namespace probmesh
