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

// Batched evaluation of isotropic kernels and their Laplacian-applied
// variants against a row of points. Each routine has a scalar reference
// implementation and an AVX2 variant; `dispatch` picks one at runtime.

#include <cstddef>

#include "probmesh/geometry.hpp"

namespace probmesh::simd {

enum class Isa { Scalar, Avx2 };

/// Best instruction set the running CPU supports.
Isa detected_isa();
/// Instruction set used by the dispatching entry points.
Isa active_isa();
/// Override the dispatch target; requests above the detected ISA are clamped.
void set_active_isa(Isa isa);
const char* isa_name(Isa isa);

/// Weights of the four derivative blocks. For isotropic kernels the mixed
/// blocks coincide, so only c20 + c02 matters.
struct RadialWeights {
  double c22 = 0.0;  // Laplacian in both arguments
  double c2 = 0.0;   // Laplacian in exactly one argument (summed)
  double c00 = 1.0;  // no operator
};

/// Row inputs in structure-of-arrays layout.
struct PointRow {
  const double* x = nullptr;
  const double* y = nullptr;  // may be null for 1D rows
  std::size_t size = 0;
};

/// out[j] = sum_w D(anchor, row[j]) for the squared-exponential kernel
/// exp(-r^2 / (2 ell^2)) in `dim` dimensions.
void sqexp_row(double length_scale, int dim, Point anchor, PointRow row, RadialWeights w,
               double* out);

/// Wendland C2 kernel (1 - eps r)_+^4 (4 eps r + 1). Requires w.c22 == 0.
void wendland_c2_row(double support_scale, int dim, Point anchor, PointRow row, RadialWeights w,
                     double* out);

/// Wendland C0 kernel (1 - eps r)_+^2. Only w.c00 is used.
void wendland_c0_row(double support_scale, Point anchor, PointRow row, double c00, double* out);

namespace scalar {
void sqexp_row(double length_scale, int dim, Point anchor, PointRow row, RadialWeights w,
               double* out);
void wendland_c2_row(double support_scale, int dim, Point anchor, PointRow row, RadialWeights w,
                     double* out);
void wendland_c0_row(double support_scale, Point anchor, PointRow row, double c00, double* out);

/// Single-pair forms shared with the kernel module.
double sqexp(double r2, double inv_s, int dim, RadialWeights w);
double wendland_c2(double r2, double eps, int dim, RadialWeights w);
double wendland_c0(double r2, double eps);
}  // namespace scalar

namespace avx2 {
bool compiled();
void sqexp_row(double length_scale, int dim, Point anchor, PointRow row, RadialWeights w,
               double* out);
void wendland_c2_row(double support_scale, int dim, Point anchor, PointRow row, RadialWeights w,
                     double* out);
void wendland_c0_row(double support_scale, Point anchor, PointRow row, double c00, double* out);
}  // namespace avx2

}  // namespace probmesh::simd
