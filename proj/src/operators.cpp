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

#include "probmesh/operators.hpp"

#include <algorithm>
#include <sstream>

#include "probmesh/errors.hpp"

namespace probmesh {

Parameter Parameter::field(std::vector<double> grid, std::vector<double> values) {
  if (grid.size() < 2 || grid.size() != values.size())
    throw DomainError("field parameter needs >= 2 grid nodes with matching values");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw DomainError("field parameter grid must be increasing");
  Parameter p;
  p.grid_ = std::move(grid);
  p.values_ = std::move(values);
  return p;
}

double Parameter::scalar() const {
  if (is_field()) throw DomainError("parameter is a field, not a scalar");
  return scalar_;
}

double Parameter::at(Point p) const {
  if (!is_field()) return scalar_;
  const double x = std::clamp(p.x, grid_.front(), grid_.back());
  auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  if (it == grid_.end()) return values_.back();
  const std::size_t j = static_cast<std::size_t>(it - grid_.begin());
  if (j == 0) return values_.front();
  const double t = (x - grid_[j - 1]) / (grid_[j] - grid_[j - 1]);
  return (1.0 - t) * values_[j - 1] + t * values_[j];
}

ThetaAffine Coefficient::affine() const {
  switch (kind) {
    case Kind::Constant:
      return {value, 0.0, 0.0};
    case Kind::Theta:
      return {0.0, value, 0.0};
    case Kind::InverseTheta:
      return {0.0, 0.0, value};
  }
  return {};
}

OperatorDescriptor OperatorDescriptor::identity() { return {}; }

OperatorDescriptor OperatorDescriptor::laplacian() {
  OperatorDescriptor d;
  d.kind_ = Kind::Laplacian;
  return d;
}

OperatorDescriptor OperatorDescriptor::scaled_laplacian(Coefficient c) {
  OperatorDescriptor d;
  d.kind_ = Kind::ScaledLaplacian;
  d.coefficient_ = c;
  return d;
}

OperatorDescriptor OperatorDescriptor::linear_combination(std::vector<Term> terms) {
  OperatorDescriptor d;
  d.kind_ = Kind::LinearCombination;
  d.terms_ = std::move(terms);
  return d;
}

OperatorDescriptor OperatorDescriptor::boundary_trace() {
  OperatorDescriptor d;
  d.kind_ = Kind::BoundaryTrace;
  return d;
}

namespace {

ThetaAffine scale(const Coefficient& c, const ThetaAffine& inner) {
  if (c.kind == Coefficient::Kind::Constant) return inner * c.value;
  if (!inner.is_constant())
    throw ConfigError("operator coefficient would be quadratic in theta; unsupported");
  return c.affine() * inner.c0;
}

}  // namespace

LinearForm OperatorDescriptor::linear_form() const {
  switch (kind_) {
    case Kind::Identity:
    case Kind::BoundaryTrace:
      return {{}, {1.0, 0.0, 0.0}};
    case Kind::Laplacian:
      return {{1.0, 0.0, 0.0}, {}};
    case Kind::ScaledLaplacian:
      return {coefficient_.affine(), {}};
    case Kind::LinearCombination: {
      LinearForm out;
      for (const Term& t : terms_) {
        const LinearForm inner = t.op.linear_form();
        out.lap = out.lap + scale(t.coefficient, inner.lap);
        out.id = out.id + scale(t.coefficient, inner.id);
      }
      return out;
    }
  }
  return {};
}

std::string OperatorDescriptor::describe() const {
  const LinearForm f = linear_form();
  std::ostringstream os;
  const auto put = [&](const ThetaAffine& a, const char* what) {
    os << "(" << a.c0 << " + " << a.c1 << "*theta + " << a.cm1 << "/theta)" << what;
  };
  put(f.lap, "*Lap + ");
  put(f.id, "*I");
  return os.str();
}

}  // namespace probmesh
