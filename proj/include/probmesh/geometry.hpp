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

#include <span>
#include <utility>
#include <vector>

namespace probmesh {

/// A point in one or two dimensions. One-dimensional points keep y == 0.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(Point a, Point b);

/// Lexicographic order on (x, y).
bool point_less(Point a, Point b);

/// Axis-aligned box in 1 or 2 dimensions, or a disc in 2 dimensions.
class Domain {
 public:
  enum class Shape { Box, Disc };

  static Domain interval(double lo, double hi);
  static Domain box(double x_lo, double x_hi, double y_lo, double y_hi);
  static Domain unit_interval() { return interval(0.0, 1.0); }
  static Domain unit_square() { return box(0.0, 1.0, 0.0, 1.0); }
  static Domain disc(Point centre, double radius);

  Shape shape() const { return shape_; }
  int dim() const { return dim_; }
  bool is_box() const { return shape_ == Shape::Box; }

  /// Box bounds along an axis (0 or 1). For a disc, the bounding box.
  std::pair<double, double> bounds(int axis) const;
  Point centre() const { return centre_; }
  double radius() const { return radius_; }

  /// Strictly inside, at least `margin` away from the boundary.
  bool contains_interior(Point p, double margin = 0.0) const;
  bool on_boundary(Point p, double tol = 1e-12) const;
  bool contains_closure(Point p, double tol = 1e-12) const;

  /// Open interval of admissible values for coordinate `axis` of p while the
  /// other coordinate is held fixed. Empty (lo >= hi) if none.
  std::pair<double, double> axis_range(Point p, int axis) const;

  /// Regular grid covering the closure of the domain, `per_axis` nodes per
  /// axis (points outside a disc are dropped).
  std::vector<Point> grid(int per_axis) const;

  /// Regular grid of interior points: per_axis nodes strictly inside, evenly
  /// spaced (j / (per_axis + 1)).
  std::vector<Point> interior_grid(int per_axis) const;

  /// Evenly spaced boundary points. For a 1D interval returns the two
  /// endpoints; for a box returns `per_edge` points per edge, corners
  /// excluded; for a disc returns `per_edge` points around the circle.
  std::vector<Point> boundary_points(int per_edge) const;

  /// Volume (length in 1D, area in 2D).
  double measure() const;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  Shape shape_ = Shape::Box;
  int dim_ = 1;
  double lo_[2] = {0.0, 0.0};
  double hi_[2] = {1.0, 0.0};
  Point centre_{};
  double radius_ = 0.0;
};

}  // namespace probmesh
