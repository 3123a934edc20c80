// Copyright 2026 The ShiftGuard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <vector>

#include "oracles.hpp"
#include "shiftguard/basis.hpp"
#include "shiftguard/errors.hpp"

namespace shiftguard {
namespace {

std::vector<double> features(const MonomialBasis& b, std::vector<double> x) {
  const Eigen::VectorXd f = b.features(x);
  return {f.data(), f.data() + f.size()};
}

TEST(MonomialBasis, GradedLexOrderAndValues) {
  const MonomialBasis b(2, 2, Domain::Real);
  const std::vector<Exponent> expected = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(b.exponents(), expected);
  EXPECT_EQ(features(b, {1.0, 2.0}), (std::vector<double>{1, 1, 2, 1, 2, 4}));
}

TEST(MonomialBasis, ConstantOnlyAtOrigin) {
  const MonomialBasis b(3, 1, Domain::Real);
  EXPECT_EQ(features(b, {0.0, 0.0, 0.0}), (std::vector<double>{1, 0, 0, 0}));
}

TEST(MonomialBasis, HypercubeIsMultilinear) {
  const MonomialBasis b(2, 3, Domain::Hypercube);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(features(b, {1.0, -1.0}), (std::vector<double>{1, 1, -1, -1}));
}

TEST(MonomialBasis, SizesMatchBinomialCounts) {
  const auto choose = [](int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return static_cast<std::size_t>(std::llround(v));
  };
  for (int d = 1; d <= 8; ++d) {
    for (int k = 0; k <= 4; ++k) {
      EXPECT_EQ(MonomialBasis(d, k, Domain::Real).size(), choose(d + k, k));
      EXPECT_EQ(basis_size(d, k, Domain::Real), choose(d + k, k));
      std::size_t cube = 0;
      for (int j = 0; j <= std::min(k, d); ++j) cube += choose(d, j);
      EXPECT_EQ(MonomialBasis(d, k, Domain::Hypercube).size(), cube);
      EXPECT_EQ(basis_size(d, k, Domain::Hypercube), cube);
    }
  }
}

TEST(MonomialBasis, OrderingIsGradedAndConstantFirst) {
  const MonomialBasis b(3, 4, Domain::Real);
  EXPECT_EQ(b.exponent(0), (Exponent{0, 0, 0}));
  for (std::size_t i = 1; i < b.size(); ++i) {
    const auto deg = [](const Exponent& r) { return r[0] + r[1] + r[2]; };
    const Exponent& prev = b.exponent(i - 1);
    const Exponent& cur = b.exponent(i);
    ASSERT_TRUE(deg(prev) < deg(cur) || (deg(prev) == deg(cur) && prev > cur)) << i;
    EXPECT_EQ(b.index_of(cur), i);
  }
  EXPECT_FALSE(b.index_of({5, 0, 0}).has_value());
}

TEST(MonomialBasis, MatchesBruteForceMonomials) {
  Eigen::VectorXd pool = Eigen::VectorXd::LinSpaced(7, -1.7, 2.3);
  for (int d = 1; d <= 3; ++d) {
    for (int k = 1; k <= 4; ++k) {
      const MonomialBasis b(d, k, Domain::Real);
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = pool[(trial + 3 * i) % 7];
        const Eigen::VectorXd f = b.features(x);
        for (std::size_t r = 0; r < b.size(); ++r) {
          EXPECT_NEAR(f[static_cast<Eigen::Index>(r)], testing::monomial(x, b.exponent(r)), 1e-12);
        }
      }
    }
  }
}

TEST(MonomialBasis, RowFeaturesMatchPointFeatures) {
  const MonomialBasis b(3, 3, Domain::Real);
  RowMatrix pts(4, 3);
  pts << 1, 2, 3, -1, 0.5, 0.25, 0, 0, 0, 2, -2, 1;
  const RowMatrix f = b.features(pts);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const Eigen::VectorXd row = b.features(std::span<const double>(pts.row(i).data(), 3));
    for (Eigen::Index j = 0; j < f.cols(); ++j) EXPECT_EQ(f(i, j), row[j]);
  }
}

TEST(MonomialBasis, DimensionMismatchThrows) {
  const MonomialBasis b(2, 2, Domain::Real);
  EXPECT_THROW(b.features(std::vector<double>{1.0}), DimensionError);
  EXPECT_THROW(b.features(RowMatrix::Zero(2, 3)), DimensionError);
  EXPECT_THROW(MonomialBasis(0, 2, Domain::Real), InvalidArgument);
  EXPECT_THROW(domain_from_string("sphere"), InvalidArgument);
  EXPECT_EQ(domain_from_string(to_string(Domain::Hypercube)), Domain::Hypercube);
}

}  // namespace
}  // namespace shiftguard
