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

#include <atomic>
#include <cmath>

#include "probmesh/errors.hpp"
#include "probmesh/simd/rows.hpp"

namespace probmesh::simd {

namespace scalar {

double sqexp(double r2, double inv_s, int dim, RadialWeights w) {
  const double e = std::exp(-0.5 * r2 * inv_s);
  const double d = dim;
  const double q = r2 * inv_s;  // r^2 / ell^2
  // Laplacian: e (r^2/s^2 - d/s); bi-Laplacian: e (r^4/s^4 - 2(d+2) r^2/s^3 + d(d+2)/s^2)
  const double lap = (q - d) * inv_s;
  const double bilap = (q * q - 2.0 * (d + 2.0) * q + d * (d + 2.0)) * inv_s * inv_s;
  return e * (w.c00 + w.c2 * lap + w.c22 * bilap);
}

double wendland_c2(double r2, double eps, int dim, RadialWeights w) {
  const double er = eps * std::sqrt(r2);
  if (er >= 1.0) return 0.0;
  const double u = 1.0 - er;
  const double u2 = u * u;
  const double value = u2 * u2 * (4.0 * er + 1.0);
  const double d = dim;
  const double lap = -20.0 * eps * eps * u2 * (d - (d + 3.0) * er);
  return w.c00 * value + w.c2 * lap;
}

double wendland_c0(double r2, double eps) {
  const double u = 1.0 - eps * std::sqrt(r2);
  return u > 0.0 ? u * u : 0.0;
}

namespace {
inline double row_r2(Point a, PointRow row, std::size_t j) {
  const double dx = a.x - row.x[j];
  const double dy = row.y != nullptr ? a.y - row.y[j] : a.y;
  return dx * dx + dy * dy;
}
}  // namespace

void sqexp_row(double length_scale, int dim, Point anchor, PointRow row, RadialWeights w,
               double* out) {
  const double inv_s = 1.0 / (length_scale * length_scale);
  for (std::size_t j = 0; j < row.size; ++j) out[j] = sqexp(row_r2(anchor, row, j), inv_s, dim, w);
}

void wendland_c2_row(double support_scale, int dim, Point anchor, PointRow row, RadialWeights w,
                     double* out) {
  for (std::size_t j = 0; j < row.size; ++j)
    out[j] = wendland_c2(row_r2(anchor, row, j), support_scale, dim, w);
}

void wendland_c0_row(double support_scale, Point anchor, PointRow row, double c00, double* out) {
  for (std::size_t j = 0; j < row.size; ++j)
    out[j] = c00 * wendland_c0(row_r2(anchor, row, j), support_scale);
}

}  // namespace scalar

namespace {

Isa detect() {
#if defined(__x86_64__) || defined(__i386__)
  if (avx2::compiled() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::Avx2;
#endif
  return Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa detected_isa() {
  static const Isa isa = detect();
  return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
  active().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void sqexp_row(double length_scale, int dim, Point anchor, PointRow row, RadialWeights w,
               double* out) {
  if (active_isa() == Isa::Avx2) return avx2::sqexp_row(length_scale, dim, anchor, row, w, out);
  scalar::sqexp_row(length_scale, dim, anchor, row, w, out);
}

void wendland_c2_row(double support_scale, int dim, Point anchor, PointRow row, RadialWeights w,
                     double* out) {
  if (w.c22 != 0.0)
    throw UnsupportedOperator("Wendland C2 kernel cannot take a Laplacian in both arguments");
  if (active_isa() == Isa::Avx2)
    return avx2::wendland_c2_row(support_scale, dim, anchor, row, w, out);
  scalar::wendland_c2_row(support_scale, dim, anchor, row, w, out);
}

void wendland_c0_row(double support_scale, Point anchor, PointRow row, double c00, double* out) {
  if (active_isa() == Isa::Avx2) return avx2::wendland_c0_row(support_scale, anchor, row, c00, out);
  scalar::wendland_c0_row(support_scale, anchor, row, c00, out);
}

}  // namespace probmesh::simd
