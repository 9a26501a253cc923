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

// Closed-form natural kernel of the 1D Dirichlet problem theta u'' = g on
// (0, 1) when the forcing carries the Wendland C0 covariance
// Lambda(x, x') = (1 - eps |x - x'|)_+^2.
//
// The kernel is the double integral of G(x, z) G(x', z') Lambda(z, z'),
// split by the kinks of G into four rectangle integrals I1..I4. Each
// rectangle integral is piecewise polynomial and is evaluated exactly: the
// substitution t = z - z' reduces it to a one-dimensional integral of a
// piecewise polynomial whose breakpoints are the rectangle corners and the
// support edges of Lambda.

#include <array>

namespace probmesh::green1d {

/// Green's function of d^2/dx^2 on (0, 1) with zero Dirichlet data:
/// x (x' - 1) for x <= x', x' (x - 1) otherwise.
double green_poisson_1d(double x, double xp);

/// Lambda(x, x') = (1 - eps |x - x'|)_+^2.
double wendland_c0(double x, double xp, double eps);

/// I1..I4 of the natural-kernel decomposition (unscaled, theta = 1).
std::array<double, 4> rectangle_integrals(double x, double xp, double eps);

/// k(x, x'; theta) = theta^-2 k(x, x'; 1).
double natural_kernel_poisson_1d(double x, double xp, double eps, double theta);

enum class CrossTerm { AK, AbarK, AAbarK };

/// Operator-applied natural kernel with A = theta d^2/dx^2.
///   AK(x, x')    = theta^-1 int G(x', z) Lambda(x, z) dz
///   AbarK(x, x') = AK(x', x)
///   AAbarK       = Lambda(x, x')
double natural_kernel_cross_terms(CrossTerm which, double x, double xp, double eps, double theta);

/// d^2/dx^2 k(x, x'; 1) = int G(x', z) Lambda(x, z) dz.
double natural_kernel_d20(double x, double xp, double eps);

}  // namespace probmesh::green1d
