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

#include "probmesh/green1d.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "probmesh/errors.hpp"

namespace probmesh::green1d {

namespace {

constexpr int kMaxDegree = 8;

// Dense univariate polynomial, c[k] multiplies t^k.
struct Poly {
  std::array<double, kMaxDegree + 1> c{};

  static Poly constant(double a) {
    Poly p;
    p.c[0] = a;
    return p;
  }
  static Poly linear(double a0, double a1) {
    Poly p;
    p.c[0] = a0;
    p.c[1] = a1;
    return p;
  }

  Poly operator+(const Poly& o) const {
    Poly r;
    for (int k = 0; k <= kMaxDegree; ++k) r.c[k] = c[k] + o.c[k];
    return r;
  }
  Poly operator-(const Poly& o) const {
    Poly r;
    for (int k = 0; k <= kMaxDegree; ++k) r.c[k] = c[k] - o.c[k];
    return r;
  }
  Poly operator*(double s) const {
    Poly r;
    for (int k = 0; k <= kMaxDegree; ++k) r.c[k] = c[k] * s;
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r;
    for (int i = 0; i <= kMaxDegree; ++i) {
      if (c[i] == 0.0) continue;
      for (int j = 0; i + j <= kMaxDegree; ++j) r.c[i + j] += c[i] * o.c[j];
    }
    return r;
  }

  // Exact integral over [a, b] via the antiderivative.
  double integrate(double a, double b) const {
    double fa = 0.0;
    double fb = 0.0;
    for (int k = kMaxDegree; k >= 0; --k) {
      const double ck = c[k] / (k + 1);
      fa = (fa + ck) * a;
      fb = (fb + ck) * b;
    }
    return fb - fa;
  }
};

// Lambda as a polynomial in t = z - z' on one side of t = 0 (inside support).
Poly lambda_piece_in_difference(double eps, double side) {
  const Poly u = Poly::linear(1.0, -eps * side);  // 1 - eps |t|
  return u * u;
}

// int_a^b int_c^d p(z) q(z') Lambda(z, z') dz' dz with p, q linear:
// p(z) = p0 + p1 z, q(w) = q0 + q1 w.
double rectangle_integral(double a, double b, double c, double d, double p0, double p1, double q0,
                          double q1, double eps) {
  if (!(a < b) || !(c < d)) return 0.0;
  const double reach = 1.0 / eps;
  const double t_lo = a - d;
  const double t_hi = b - c;
  std::vector<double> cuts = {t_lo, t_hi, a - c, b - d, -reach, 0.0, reach};
  std::erase_if(cuts, [&](double t) { return t < t_lo || t > t_hi; });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // A(t) = q0 - q1 t; p(z) q(z - t) = p0 A + (p1 A + p0 q1) z + p1 q1 z^2.
  const Poly A = Poly::linear(q0, -q1);
  const Poly k0 = A * p0;
  const Poly k1 = A * p1 + Poly::constant(p0 * q1);
  const double k2 = p1 * q1;
  // Antiderivative in z evaluated at z = L(t).
  const auto primitive = [&](const Poly& L) {
    const Poly L2 = L * L;
    return k0 * L + k1 * L2 * 0.5 + L2 * L * (k2 / 3.0);
  };

  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double t0 = cuts[s];
    const double t1 = cuts[s + 1];
    if (!(t1 > t0)) continue;
    const double tm = 0.5 * (t0 + t1);
    if (std::abs(tm) >= reach) continue;
    // z ranges over [max(a, c + t), min(b, d + t)].
    const Poly lo = (a >= c + tm) ? Poly::constant(a) : Poly::linear(c, 1.0);
    const Poly hi = (b <= d + tm) ? Poly::constant(b) : Poly::linear(d, 1.0);
    const Poly width = primitive(hi) - primitive(lo);
    const Poly integrand = width * lambda_piece_in_difference(eps, tm >= 0.0 ? 1.0 : -1.0);
    total += integrand.integrate(t0, t1);
  }
  return total;
}

// int_a^b p(z) Lambda(x, z) dz with p(z) = p0 + p1 z.
double segment_integral(double a, double b, double p0, double p1, double x, double eps) {
  if (!(a < b)) return 0.0;
  const double reach = 1.0 / eps;
  std::vector<double> cuts = {a, b, x - reach, x, x + reach};
  std::erase_if(cuts, [&](double z) { return z < a || z > b; });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const Poly p = Poly::linear(p0, p1);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double z0 = cuts[s];
    const double z1 = cuts[s + 1];
    if (!(z1 > z0)) continue;
    const double zm = 0.5 * (z0 + z1);
    if (std::abs(x - zm) >= reach) continue;
    // 1 - eps |x - z| as a polynomial in z on this side of x.
    const Poly u = zm < x ? Poly::linear(1.0 - eps * x, eps) : Poly::linear(1.0 + eps * x, -eps);
    total += (p * u * u).integrate(z0, z1);
  }
  return total;
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

void check_params(double eps, double theta) {
  if (!(eps > 0.0)) throw DomainError("support scale must be positive");
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
}

}  // namespace

double green_poisson_1d(double x, double xp) {
  check_unit(x, "x");
  check_unit(xp, "x'");
  return x <= xp ? x * (xp - 1.0) : xp * (x - 1.0);
}

double wendland_c0(double x, double xp, double eps) {
  const double u = 1.0 - eps * std::abs(x - xp);
  return u > 0.0 ? u * u : 0.0;
}

std::array<double, 4> rectangle_integrals(double x, double xp, double eps) {
  check_unit(x, "x");
  check_unit(xp, "x'");
  if (!(eps > 0.0)) throw DomainError("support scale must be positive");
  // G(x, z) = z (x - 1) for z < x and x (z - 1) for z > x.
  return {
      rectangle_integral(0.0, x, 0.0, xp, 0.0, 1.0, 0.0, 1.0, eps),    // z z'
      rectangle_integral(0.0, x, xp, 1.0, 0.0, 1.0, -1.0, 1.0, eps),   // z (z' - 1)
      rectangle_integral(x, 1.0, 0.0, xp, -1.0, 1.0, 0.0, 1.0, eps),   // (z - 1) z'
      rectangle_integral(x, 1.0, xp, 1.0, -1.0, 1.0, -1.0, 1.0, eps),  // (z - 1)(z' - 1)
  };
}

double natural_kernel_poisson_1d(double x, double xp, double eps, double theta) {
  check_params(eps, theta);
  if (xp < x) std::swap(x, xp);
  const auto I = rectangle_integrals(x, xp, eps);
  const double k1 = (x - 1.0) * (xp - 1.0) * I[0] + (x - 1.0) * xp * I[1] +
                    x * (xp - 1.0) * I[2] + x * xp * I[3];
  return k1 / (theta * theta);
}

double natural_kernel_d20(double x, double xp, double eps) {
  check_unit(x, "x");
  check_unit(xp, "x'");
  if (!(eps > 0.0)) throw DomainError("support scale must be positive");
  // G(x', z) = z (x' - 1) for z < x', x' (z - 1) for z > x'.
  return (xp - 1.0) * segment_integral(0.0, xp, 0.0, 1.0, x, eps) +
         xp * segment_integral(xp, 1.0, -1.0, 1.0, x, eps);
}

double natural_kernel_cross_terms(CrossTerm which, double x, double xp, double eps, double theta) {
  check_params(eps, theta);
  check_unit(x, "x");
  check_unit(xp, "x'");
  switch (which) {
    case CrossTerm::AK:
      return natural_kernel_d20(x, xp, eps) / theta;
    case CrossTerm::AbarK:
      return natural_kernel_d20(xp, x, eps) / theta;
    case CrossTerm::AAbarK:
      return wendland_c0(x, xp, eps);
  }
  throw ConfigError("unknown natural-kernel cross term");
}

}  // namespace probmesh::green1d
