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

#include "probmesh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "probmesh/errors.hpp"

namespace probmesh {

double distance(Point a, Point b) { return std::sqrt(squared_distance(a, b)); }

bool point_less(Point a, Point b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

Domain Domain::interval(double lo, double hi) {
  if (!(lo < hi)) throw DomainError("interval requires lo < hi");
  Domain d;
  d.shape_ = Shape::Box;
  d.dim_ = 1;
  d.lo_[0] = lo;
  d.hi_[0] = hi;
  return d;
}

Domain Domain::box(double x_lo, double x_hi, double y_lo, double y_hi) {
  if (!(x_lo < x_hi) || !(y_lo < y_hi)) throw DomainError("box requires lo < hi on both axes");
  Domain d;
  d.shape_ = Shape::Box;
  d.dim_ = 2;
  d.lo_[0] = x_lo;
  d.hi_[0] = x_hi;
  d.lo_[1] = y_lo;
  d.hi_[1] = y_hi;
  return d;
}

Domain Domain::disc(Point centre, double radius) {
  if (!(radius > 0.0)) throw DomainError("disc radius must be positive");
  Domain d;
  d.shape_ = Shape::Disc;
  d.dim_ = 2;
  d.centre_ = centre;
  d.radius_ = radius;
  d.lo_[0] = centre.x - radius;
  d.hi_[0] = centre.x + radius;
  d.lo_[1] = centre.y - radius;
  d.hi_[1] = centre.y + radius;
  return d;
}

std::pair<double, double> Domain::bounds(int axis) const { return {lo_[axis], hi_[axis]}; }

bool Domain::contains_interior(Point p, double margin) const {
  if (shape_ == Shape::Disc) return distance(p, centre_) < radius_ - margin;
  if (!(p.x > lo_[0] + margin && p.x < hi_[0] - margin)) return false;
  if (dim_ == 2) return p.y > lo_[1] + margin && p.y < hi_[1] - margin;
  return true;
}

bool Domain::contains_closure(Point p, double tol) const {
  if (shape_ == Shape::Disc) return distance(p, centre_) <= radius_ + tol;
  if (p.x < lo_[0] - tol || p.x > hi_[0] + tol) return false;
  if (dim_ == 2) return p.y >= lo_[1] - tol && p.y <= hi_[1] + tol;
  return true;
}

bool Domain::on_boundary(Point p, double tol) const {
  if (shape_ == Shape::Disc) return std::abs(distance(p, centre_) - radius_) <= tol;
  if (!contains_closure(p, tol)) return false;
  bool edge = std::abs(p.x - lo_[0]) <= tol || std::abs(p.x - hi_[0]) <= tol;
  if (dim_ == 2) edge = edge || std::abs(p.y - lo_[1]) <= tol || std::abs(p.y - hi_[1]) <= tol;
  return edge;
}

std::pair<double, double> Domain::axis_range(Point p, int axis) const {
  if (shape_ == Shape::Box) return {lo_[axis], hi_[axis]};
  const double other = axis == 0 ? p.y - centre_.y : p.x - centre_.x;
  const double h2 = radius_ * radius_ - other * other;
  if (h2 <= 0.0) return {0.0, 0.0};
  const double h = std::sqrt(h2);
  const double c = axis == 0 ? centre_.x : centre_.y;
  return {c - h, c + h};
}

std::vector<Point> Domain::grid(int per_axis) const {
  if (per_axis < 2) throw DomainError("grid needs at least two nodes per axis");
  std::vector<Point> out;
  const auto node = [&](int axis, int j) {
    return lo_[axis] + (hi_[axis] - lo_[axis]) * static_cast<double>(j) / (per_axis - 1);
  };
  if (dim_ == 1) {
    out.reserve(per_axis);
    for (int i = 0; i < per_axis; ++i) out.push_back({node(0, i), 0.0});
    return out;
  }
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      Point p{node(0, i), node(1, j)};
      if (contains_closure(p)) out.push_back(p);
    }
  }
  return out;
}

std::vector<Point> Domain::interior_grid(int per_axis) const {
  if (per_axis < 1) throw DomainError("interior grid needs at least one node per axis");
  std::vector<Point> out;
  const auto node = [&](int axis, int j) {
    return lo_[axis] + (hi_[axis] - lo_[axis]) * static_cast<double>(j + 1) / (per_axis + 1);
  };
  if (dim_ == 1) {
    for (int i = 0; i < per_axis; ++i) out.push_back({node(0, i), 0.0});
    return out;
  }
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      Point p{node(0, i), node(1, j)};
      if (contains_interior(p)) out.push_back(p);
    }
  }
  return out;
}

std::vector<Point> Domain::boundary_points(int per_edge) const {
  std::vector<Point> out;
  if (dim_ == 1) return {{lo_[0], 0.0}, {hi_[0], 0.0}};
  if (per_edge < 1) throw DomainError("boundary sampler needs at least one point per edge");
  if (shape_ == Shape::Disc) {
    for (int j = 0; j < per_edge; ++j) {
      const double a = 2.0 * std::numbers::pi * j / per_edge;
      out.push_back({centre_.x + radius_ * std::cos(a), centre_.y + radius_ * std::sin(a)});
    }
    return out;
  }
  // Corners are skipped: edge values may conflict there.
  for (int j = 0; j < per_edge; ++j) {
    const double t = static_cast<double>(j + 1) / (per_edge + 1);
    const double xs = lo_[0] + t * (hi_[0] - lo_[0]);
    const double ys = lo_[1] + t * (hi_[1] - lo_[1]);
    out.push_back({lo_[0], ys});
    out.push_back({hi_[0], ys});
    out.push_back({xs, lo_[1]});
    out.push_back({xs, hi_[1]});
  }
  return out;
}

double Domain::measure() const {
  if (shape_ == Shape::Disc) return std::numbers::pi * radius_ * radius_;
  double m = hi_[0] - lo_[0];
  if (dim_ == 2) m *= hi_[1] - lo_[1];
  return m;
}

}  // namespace probmesh
