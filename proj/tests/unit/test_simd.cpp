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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "probmesh/simd/rows.hpp"

namespace probmesh::simd {
namespace {

struct Row {
  std::vector<double> x, y;
  PointRow view(bool two_d) const { return {x.data(), two_d ? y.data() : nullptr, x.size()}; }
};

Row random_row(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Row r;
  for (std::size_t i = 0; i < n; ++i) {
    r.x.push_back(u(rng));
    r.y.push_back(u(rng));
  }
  return r;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  return worst;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!avx2::compiled() || detected_isa() != Isa::Avx2) GTEST_SKIP() << "AVX2 not available";
  }
};

TEST_F(SimdEquivalence, SquaredExponentialRows) {
  // Lengths cover the vector tail handling.
  for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 101u})
    for (int dim : {1, 2})
      for (RadialWeights w : {RadialWeights{0.0, 0.0, 1.0}, RadialWeights{0.0, 2.0, 0.5}, RadialWeights{1.0, -0.3, 0.2}}) {
        const Row row = random_row(n, n * 7 + dim);
        std::vector<double> s(n), v(n);
        const Point anchor{0.41, dim == 2 ? 0.62 : 0.0};
        scalar::sqexp_row(0.17, dim, anchor, row.view(dim == 2), w, s.data());
        avx2::sqexp_row(0.17, dim, anchor, row.view(dim == 2), w, v.data());
        EXPECT_LT(rel_diff(s, v), 1e-13) << "n=" << n << " dim=" << dim;
      }
}

TEST_F(SimdEquivalence, WendlandC2Rows) {
  for (std::size_t n : {1u, 5u, 8u, 33u, 200u})
    for (int dim : {1, 2})
      for (RadialWeights w : {RadialWeights{0.0, 0.0, 1.0}, RadialWeights{0.0, 1.0, 0.0}, RadialWeights{0.0, -2.0, 3.0}}) {
        const Row row = random_row(n, n * 13 + dim);
        std::vector<double> s(n), v(n);
        const Point anchor{0.5, dim == 2 ? 0.3 : 0.0};
        scalar::wendland_c2_row(2.5, dim, anchor, row.view(dim == 2), w, s.data());
        avx2::wendland_c2_row(2.5, dim, anchor, row.view(dim == 2), w, v.data());
        EXPECT_LT(rel_diff(s, v), 1e-13) << "n=" << n << " dim=" << dim;
      }
}

TEST_F(SimdEquivalence, WendlandC0Rows) {
  for (std::size_t n : {2u, 4u, 9u, 150u}) {
    const Row row = random_row(n, n);
    std::vector<double> s(n), v(n);
    scalar::wendland_c0_row(2.5, {0.37}, row.view(false), 1.5, s.data());
    avx2::wendland_c0_row(2.5, {0.37}, row.view(false), 1.5, v.data());
    EXPECT_LT(rel_diff(s, v), 1e-14);
  }
}

TEST_F(SimdEquivalence, ExactZerosOutsideSupport) {
  const Row row{{0.0, 0.05, 0.95, 1.0, 0.9}, {}};
  std::vector<double> v(row.x.size());
  avx2::wendland_c2_row(2.5, 1, {0.5}, row.view(false), RadialWeights{0.0, 1.0, 1.0}, v.data());
  for (double e : v) EXPECT_EQ(e, 0.0);
}

TEST(SimdDispatch, OverrideIsClampedAndRestorable) {
  const Isa before = active_isa();
  set_active_isa(Isa::Scalar);
  EXPECT_EQ(active_isa(), Isa::Scalar);
  set_active_isa(Isa::Avx2);
  EXPECT_EQ(active_isa(), detected_isa());
  set_active_isa(before);
  EXPECT_STRNE(isa_name(Isa::Scalar), isa_name(Isa::Avx2));
}

TEST(SimdDispatch, DispatchMatchesScalar) {
  const Row row = random_row(37, 99);
  std::vector<double> s(37), d(37);
  scalar::sqexp_row(0.3, 2, {0.2, 0.8}, row.view(true), RadialWeights{1.0, 1.0, 1.0}, s.data());
  sqexp_row(0.3, 2, {0.2, 0.8}, row.view(true), RadialWeights{1.0, 1.0, 1.0}, d.data());
  EXPECT_LT(rel_diff(s, d), 1e-13);
}

}  // namespace
}  // namespace probmesh::simd
