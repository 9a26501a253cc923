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

// Compiled with -mavx2 -mfma; only reached through runtime dispatch.

#include <cstring>

#include "probmesh/simd/rows.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define PROBMESH_HAVE_AVX2 1
#else
#define PROBMESH_HAVE_AVX2 0
#endif

namespace probmesh::simd::avx2 {

#if PROBMESH_HAVE_AVX2

namespace {

// exp(x) for x <= 0. Cody-Waite reduction to |r| <= ln2/2, then a degree-13
// Taylor polynomial (truncation below 1e-17 relative).
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d lower = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lower);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double kInvFact[14] = {1.0,
                                          1.0,
                                          1.0 / 2.0,
                                          1.0 / 6.0,
                                          1.0 / 24.0,
                                          1.0 / 120.0,
                                          1.0 / 720.0,
                                          1.0 / 5040.0,
                                          1.0 / 40320.0,
                                          1.0 / 362880.0,
                                          1.0 / 3628800.0,
                                          1.0 / 39916800.0,
                                          1.0 / 479001600.0,
                                          1.0 / 6227020800.0};
  __m256d p = _mm256_set1_pd(kInvFact[13]);
  for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d scale = _mm256_castsi256_pd(bits);
  return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

inline __m256d load_or_zero(const double* p, std::size_t j) {
  return p != nullptr ? _mm256_loadu_pd(p + j) : _mm256_setzero_pd();
}

inline __m256d row_r2(Point a, PointRow row, std::size_t j) {
  const __m256d dx = _mm256_sub_pd(_mm256_set1_pd(a.x), _mm256_loadu_pd(row.x + j));
  const __m256d dy = _mm256_sub_pd(_mm256_set1_pd(a.y), load_or_zero(row.y, j));
  return _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
}

}  // namespace

bool compiled() { return true; }

void sqexp_row(double length_scale, int dim, Point anchor, PointRow row, RadialWeights w,
               double* out) {
  const double inv_s = 1.0 / (length_scale * length_scale);
  const double d = dim;
  const __m256d vinv_s = _mm256_set1_pd(inv_s);
  const __m256d vneg_half_inv_s = _mm256_set1_pd(-0.5 * inv_s);
  const __m256d vd = _mm256_set1_pd(d);
  const __m256d vb1 = _mm256_set1_pd(-2.0 * (d + 2.0));
  const __m256d vb0 = _mm256_set1_pd(d * (d + 2.0));
  const __m256d c00 = _mm256_set1_pd(w.c00);
  const __m256d c2 = _mm256_set1_pd(w.c2);
  const __m256d c22 = _mm256_set1_pd(w.c22);
  std::size_t j = 0;
  for (; j + 4 <= row.size; j += 4) {
    const __m256d r2 = row_r2(anchor, row, j);
    const __m256d e = exp_nonpositive(_mm256_mul_pd(r2, vneg_half_inv_s));
    const __m256d q = _mm256_mul_pd(r2, vinv_s);
    const __m256d lap = _mm256_mul_pd(_mm256_sub_pd(q, vd), vinv_s);
    __m256d bilap = _mm256_fmadd_pd(q, q, _mm256_fmadd_pd(vb1, q, vb0));
    bilap = _mm256_mul_pd(bilap, _mm256_mul_pd(vinv_s, vinv_s));
    const __m256d mix = _mm256_fmadd_pd(c22, bilap, _mm256_fmadd_pd(c2, lap, c00));
    _mm256_storeu_pd(out + j, _mm256_mul_pd(e, mix));
  }
  if (j < row.size) {
    PointRow tail{row.x + j, row.y != nullptr ? row.y + j : nullptr, row.size - j};
    scalar::sqexp_row(length_scale, dim, anchor, tail, w, out + j);
  }
}

void wendland_c2_row(double support_scale, int dim, Point anchor, PointRow row, RadialWeights w,
                     double* out) {
  const double d = dim;
  const __m256d eps = _mm256_set1_pd(support_scale);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d lap_scale = _mm256_set1_pd(-20.0 * support_scale * support_scale);
  const __m256d vd = _mm256_set1_pd(d);
  const __m256d vd3 = _mm256_set1_pd(d + 3.0);
  const __m256d c00 = _mm256_set1_pd(w.c00);
  const __m256d c2 = _mm256_set1_pd(w.c2);
  std::size_t j = 0;
  for (; j + 4 <= row.size; j += 4) {
    const __m256d er = _mm256_mul_pd(eps, _mm256_sqrt_pd(row_r2(anchor, row, j)));
    const __m256d inside = _mm256_cmp_pd(er, one, _CMP_LT_OQ);
    const __m256d u = _mm256_sub_pd(one, er);
    const __m256d u2 = _mm256_mul_pd(u, u);
    const __m256d value = _mm256_mul_pd(_mm256_mul_pd(u2, u2), _mm256_fmadd_pd(four, er, one));
    const __m256d lap = _mm256_mul_pd(_mm256_mul_pd(lap_scale, u2), _mm256_fnmadd_pd(vd3, er, vd));
    const __m256d mix = _mm256_fmadd_pd(c00, value, _mm256_mul_pd(c2, lap));
    _mm256_storeu_pd(out + j, _mm256_and_pd(inside, mix));
  }
  if (j < row.size) {
    PointRow tail{row.x + j, row.y != nullptr ? row.y + j : nullptr, row.size - j};
    scalar::wendland_c2_row(support_scale, dim, anchor, tail, w, out + j);
  }
}

void wendland_c0_row(double support_scale, Point anchor, PointRow row, double c00, double* out) {
  const __m256d eps = _mm256_set1_pd(support_scale);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d vc = _mm256_set1_pd(c00);
  std::size_t j = 0;
  for (; j + 4 <= row.size; j += 4) {
    const __m256d er = _mm256_mul_pd(eps, _mm256_sqrt_pd(row_r2(anchor, row, j)));
    const __m256d u = _mm256_max_pd(_mm256_sub_pd(one, er), zero);
    _mm256_storeu_pd(out + j, _mm256_mul_pd(vc, _mm256_mul_pd(u, u)));
  }
  if (j < row.size) {
    PointRow tail{row.x + j, row.y != nullptr ? row.y + j : nullptr, row.size - j};
    scalar::wendland_c0_row(support_scale, anchor, tail, c00, out + j);
  }
}

#else  // !PROBMESH_HAVE_AVX2

bool compiled() { return false; }

void sqexp_row(double length_scale, int dim, Point anchor, PointRow row, RadialWeights w,
               double* out) {
  scalar::sqexp_row(length_scale, dim, anchor, row, w, out);
}

void wendland_c2_row(double support_scale, int dim, Point anchor, PointRow row, RadialWeights w,
                     double* out) {
  scalar::wendland_c2_row(support_scale, dim, anchor, row, w, out);
}

void wendland_c0_row(double support_scale, Point anchor, PointRow row, double c00, double* out) {
  scalar::wendland_c0_row(support_scale, anchor, row, c00, out);
}

#endif

}  // namespace probmesh::simd::avx2
