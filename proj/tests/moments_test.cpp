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

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "shiftguard/errors.hpp"
#include "shiftguard/moments.hpp"
#include "shiftguard/polynomial.hpp"
#include "shiftguard/synth.hpp"

namespace shiftguard {
namespace {

TEST(EstimateMoments, OneDimensionalHermiteBracket) {
  const BasisPtr b = make_basis(1, 2, Domain::Real);
  const MomentMatrix m = estimate_moments(Generator::gaussian(1, 11).sample(100000), b, 0.1);
  for (const Polynomial& q : orthonormal_test_basis(b, Reference::GaussianStd)) {
    const double v = q.coefficients().dot(m.matrix() * q.coefficients());
    EXPECT_GE(v, 0.85);
    EXPECT_LE(v, 1.15);
  }
}

TEST(EstimateMoments, CloseToClosedFormGaussianMoments) {
  const BasisPtr b = make_basis(2, 2, Domain::Real);
  const MomentMatrix m = estimate_moments(Generator::gaussian(2, 3).sample(100000), b, 0.1);
  const Eigen::MatrixXd exact = testing::exact_gaussian_moments(*b);
  EXPECT_LE((m.matrix() - exact).cwiseAbs().maxCoeff(), 0.25);
}

TEST(EstimateMoments, AllZerosIsRankOne) {
  Dataset zeros{RowMatrix::Zero(100, 3), Domain::Real};
  const MomentMatrix m = estimate_moments(zeros, make_basis(3, 2, Domain::Real), 0.1);
  EXPECT_EQ(m.rank(), 1u);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(10, 10);
  expected(0, 0) = 1.0;
  EXPECT_EQ(m.matrix(), expected);
}

TEST(EstimateMoments, HypercubeParitiesNearIdentity) {
  const BasisPtr b = make_basis(2, 1, Domain::Hypercube);
  const MomentMatrix m = estimate_moments(Generator::hypercube(2, 5).sample(10000), b, 0.1);
  EXPECT_LE((m.matrix() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(EstimateMoments, ShuffleStability) {
  const BasisPtr b = make_basis(2, 2, Domain::Real);
  Dataset data = Generator::gaussian(2, 21).sample(40000);
  const MomentMatrix m1 = estimate_moments(data, b, 0.1);
  Rng rng(99);
  for (Eigen::Index i = data.points.rows() - 1; i > 0; --i) {
    data.points.row(i).swap(data.points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(i) + 1))));
  }
  const MomentMatrix m2 = estimate_moments(data, b, 0.1);
  const double rel = (m1.matrix() - m2.matrix()).operatorNorm() / m1.matrix().operatorNorm();
  EXPECT_LE(rel, 0.1);
}

TEST(EstimateMoments, Errors) {
  const BasisPtr b = make_basis(2, 1, Domain::Real);
  EXPECT_THROW(estimate_moments(Dataset{RowMatrix::Zero(3, 2), Domain::Real}, b, 0.1), InvalidArgument);
  EXPECT_THROW(estimate_moments(Dataset{RowMatrix::Zero(0, 2), Domain::Real}, b, 0.1), InvalidArgument);
  EXPECT_THROW(estimate_moments(Dataset{RowMatrix::Zero(16, 3), Domain::Real}, b, 0.1), DimensionError);
}

TEST(MomentMatrix, WhiteningIsIdentityOnRetainedSpace) {
  const BasisPtr b = make_basis(2, 2, Domain::Real);
  const MomentMatrix m = estimate_moments(Generator::gaussian(2, 8).sample(10000), b, 0.1);
  const Eigen::MatrixXd s = m.pseudo_sqrt_inv();
  const Eigen::MatrixXd p = s * m.matrix() * s;
  const Eigen::MatrixXd proj = m.eigenvectors() * m.eigenvectors().transpose();
  EXPECT_LE((p - proj).cwiseAbs().maxCoeff(), 1e-8);
  const double top = m.eigenvalues().maxCoeff();
  for (Eigen::Index i = 0; i < m.eigenvalues().size(); ++i) EXPECT_GT(m.eigenvalues()[i], m.rank_cutoff() * top);
}

TEST(MomentMatrix, LeverageMatchesPseudoInverseQuadraticForm) {
  const BasisPtr b = make_basis(2, 2, Domain::Real);
  const MomentMatrix m = estimate_moments(Generator::gaussian(2, 9).sample(10000), b, 0.1);
  const Eigen::VectorXd phi = b->features(std::vector<double>{1.5, -0.5});
  EXPECT_NEAR(m.leverage({phi.data(), 6}), phi.dot(m.pseudo_inverse() * phi), 1e-9 * phi.squaredNorm());
}

TEST(MaxRatio, RejectsNonSymmetricQ) {
  const MomentMatrix m(make_basis(2, 1, Domain::Real), Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(3, 3);
  q(0, 1) = 0.5;
  EXPECT_THROW(max_ratio_polynomial(m, q), InvalidArgument);
  EXPECT_THROW(max_ratio_polynomial(m, Eigen::MatrixXd::Identity(4, 4)), DimensionError);
  EXPECT_THROW(MomentMatrix(make_basis(2, 1, Domain::Real), Eigen::MatrixXd::Identity(4, 4)), DimensionError);
}

TEST(PsdDominates, Trivial) {
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_TRUE(psd_dominates(2 * i, i, 0.0));
  EXPECT_FALSE(psd_dominates(i, 2 * i, 0.0));
  EXPECT_THROW(psd_dominates(i, Eigen::MatrixXd::Identity(3, 3), 0.0), DimensionError);
}

TEST(PsdDominates, RankOnePerturbationAgainstEigensolver) {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd g(5, 5);
    Eigen::VectorXd v(5);
    for (Eigen::Index i = 0; i < 25; ++i) g.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < 5; ++i) v[i] = rng.normal();
    const Eigen::MatrixXd a = g * g.transpose();
    const double e = (trial % 2 == 0 ? 1.0 : -1.0) * (0.01 + rng.uniform());
    const Eigen::MatrixXd b = a + e * v * v.transpose();
    // B dominates A iff e >= 0; compare with a dense eigensolver on B - A.
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b - a).eigenvalues().minCoeff();
    EXPECT_EQ(psd_dominates(b, a, 1e-9), min_eig >= -1e-9);
    EXPECT_EQ(psd_dominates(b, a, 1e-9), e >= 0.0);
  }
}

TEST(MaxRatio, DiagonalQuadratic) {
  const BasisPtr b = make_basis(2, 1, Domain::Real);
  const MomentMatrix m(b, Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(3, 3);
  q(0, 0) = 3.0;
  const MaxRatioResult r = max_ratio_polynomial(m, q);
  EXPECT_NEAR(r.value, 3.0, 1e-12);
  EXPECT_NEAR(std::abs(r.polynomial.coefficients()[0]), 1.0, 1e-12);
  EXPECT_NEAR(r.polynomial.coefficients().tail(2).norm(), 0.0, 1e-12);
}

TEST(MaxRatio, SelfRatioIsOne) {
  const BasisPtr b = make_basis(2, 2, Domain::Real);
  const MomentMatrix m = estimate_moments(Generator::gaussian(2, 4).sample(10000), b, 0.1);
  EXPECT_NEAR(max_ratio_polynomial(m, m.matrix()).value, 1.0, 1e-8);
}

TEST(MaxRatio, ConstraintAndValueHoldOnRandomInstances) {
  Rng rng(23);
  const BasisPtr b = make_basis(2, 2, Domain::Real);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(6, 6);
    Eigen::MatrixXd c(6, 6);
    for (Eigen::Index i = 0; i < 36; ++i) {
      a.data()[i] = rng.normal();
      c.data()[i] = rng.normal();
    }
    const MomentMatrix m(b, a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(6, 6));
    const Eigen::MatrixXd q = c * c.transpose();
    const MaxRatioResult r = max_ratio_polynomial(m, q);
    const Eigen::VectorXd& p = r.polynomial.coefficients();
    EXPECT_LE(p.dot(m.matrix() * p), 1.0 + 1e-6);
    EXPECT_NEAR(p.dot(q * p), r.value, 1e-6 * r.value);
    // Generalized eigenvalue oracle.
    const double top = Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>(q, m.matrix()).eigenvalues().maxCoeff();
    EXPECT_NEAR(r.value, top, 1e-6 * top);
  }
}

}  // namespace
}  // namespace shiftguard
