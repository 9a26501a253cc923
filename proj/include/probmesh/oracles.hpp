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

#include <vector>

#include <Eigen/Dense>

// Reference computations written from first principles for testing. Nothing
// here calls into the main library.

namespace probmesh::oracle {

/// Green's function of d^2/dx^2 on (0, 1), zero Dirichlet data.
double green(double x, double z);

/// (1 - eps |r|)_+^2.
double wendland_c0(double r, double eps);

/// Natural kernel at theta = 1 by nested adaptive Gauss-Kronrod quadrature of
/// G(x, z) Lambda(z, z') G(x', z').
double natural_kernel(double x, double xp, double eps);

/// d^2/dx^2 of the natural kernel: int G(x', z) Lambda(x, z) dz.
double natural_kernel_d20(double x, double xp, double eps);

/// Squared exponential in 1D and its even derivatives in r = x - x'.
double se(double r, double ell);
double se_d2(double r, double ell);  // d^2/dr^2
double se_d4(double r, double ell);  // d^4/dr^4

/// log N(y; mean, cov) through an LU factorisation and an explicit inverse,
/// in extended precision.
double gaussian_log_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// 1D squared-exponential collocation for a u'' = g, u = b on the boundary.
struct Dense1D {
  double a = 1.0;
  double ell = 0.2;
  std::vector<double> interior;
  std::vector<double> boundary;
  double jitter = 0.0;  // added to the Gram diagonal
};

/// Gram matrix of [a d^2/dx^2 at interior; trace at boundary].
Eigen::MatrixXd dense_gram(const Dense1D& s);
/// Cross covariance between u(x) at `points` and the collocation functionals.
Eigen::MatrixXd dense_cross(const Dense1D& s, const std::vector<double>& points);

/// log N(y; mu(X), Sigma(X) + gamma^2 I) from the dense joint Gaussian.
double dense_marginal_log_likelihood(const Dense1D& s, const Eigen::VectorXd& data,
                                     const std::vector<double>& x, const Eigen::VectorXd& y, double gamma);

/// Linearised semi-linear problem a u'' + alpha u = g with functionals
/// [a d^2/dx^2; identity] at the interior points and the trace at the
/// boundary. With a flat density on z = a u'' at the interior points,
/// int N(y; mu(z), Sigma + gamma^2 I) dz in closed form. Requires the number
/// of interior points not to exceed the number of observations.
double linear_latent_log_likelihood(const Dense1D& s, double alpha, const Eigen::VectorXd& g,
                                    const Eigen::VectorXd& b, const std::vector<double>& x,
                                    const Eigen::VectorXd& y, double gamma);

}  // namespace probmesh::oracle
