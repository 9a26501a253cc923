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

#include <string>
#include <vector>

#include "probmesh/geometry.hpp"

namespace probmesh {

/// Model parameter theta: a positive scalar, or a 1D field given by nodal
/// values on a grid and evaluated by linear interpolation.
class Parameter {
 public:
  Parameter(double scalar = 1.0) : scalar_(scalar) {}  // NOLINT(google-explicit-constructor)

  static Parameter field(std::vector<double> grid, std::vector<double> values);

  bool is_field() const { return !grid_.empty(); }
  /// Scalar value; throws DomainError for a field parameter.
  double scalar() const;
  double at(Point p) const;

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double scalar_ = 1.0;
  std::vector<double> grid_;
  std::vector<double> values_;
};

/// c0 + c1 theta + c_{-1} / theta.
struct ThetaAffine {
  double c0 = 0.0;
  double c1 = 0.0;
  double cm1 = 0.0;

  double eval(double theta) const { return c0 + c1 * theta + (cm1 != 0.0 ? cm1 / theta : 0.0); }
  bool is_zero() const { return c0 == 0.0 && c1 == 0.0 && cm1 == 0.0; }
  bool is_constant() const { return c1 == 0.0 && cm1 == 0.0; }

  ThetaAffine operator+(const ThetaAffine& o) const { return {c0 + o.c0, c1 + o.c1, cm1 + o.cm1}; }
  ThetaAffine operator*(double s) const { return {c0 * s, c1 * s, cm1 * s}; }
  friend bool operator==(const ThetaAffine&, const ThetaAffine&) = default;
};

/// Operator coefficients are restricted to c, theta * c or c / theta.
struct Coefficient {
  enum class Kind { Constant, Theta, InverseTheta };
  Kind kind = Kind::Constant;
  double value = 1.0;

  static Coefficient constant(double c) { return {Kind::Constant, c}; }
  static Coefficient theta(double c = 1.0) { return {Kind::Theta, c}; }
  static Coefficient inverse_theta(double c = 1.0) { return {Kind::InverseTheta, c}; }

  ThetaAffine affine() const;
  friend bool operator==(const Coefficient&, const Coefficient&) = default;
};

/// Normalised second-order isotropic operator: lap * Laplacian + id * I.
struct LinearForm {
  ThetaAffine lap;
  ThetaAffine id;

  int order() const { return lap.is_zero() ? 0 : 2; }
  friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

/// Symbolic description of a linear operator applied to one kernel argument.
class OperatorDescriptor {
 public:
  enum class Kind { Identity, Laplacian, ScaledLaplacian, LinearCombination, BoundaryTrace };

  struct Term;

  static OperatorDescriptor identity();
  static OperatorDescriptor laplacian();
  static OperatorDescriptor scaled_laplacian(Coefficient c);
  static OperatorDescriptor linear_combination(std::vector<Term> terms);
  /// Dirichlet trace: the identity evaluated at boundary points.
  static OperatorDescriptor boundary_trace();

  Kind kind() const { return kind_; }
  /// Throws ConfigError when a combination would need theta^2 or theta^-2.
  LinearForm linear_form() const;
  int order() const { return linear_form().order(); }
  std::string describe() const;

 private:
  Kind kind_ = Kind::Identity;
  Coefficient coefficient_{};
  std::vector<Term> terms_;
};

struct OperatorDescriptor::Term {
  Coefficient coefficient;
  OperatorDescriptor op;
};

}  // namespace probmesh
