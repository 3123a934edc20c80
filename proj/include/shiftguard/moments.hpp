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

#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "shiftguard/basis.hpp"
#include "shiftguard/dataset.hpp"
#include "shiftguard/polynomial.hpp"

namespace shiftguard {

/// Eigenvalues at or below this fraction of the largest one are treated as
/// zero by every pseudo-inverse.
inline constexpr double kDefaultRankCutoff = 1e-10;

/// Estimate of E[(x^k)(x^k)^T] under a reference distribution with a cached
/// eigendecomposition of its retained (non-negligible) spectrum.
class MomentMatrix {
 public:
  MomentMatrix() = default;
  MomentMatrix(BasisPtr basis, Eigen::MatrixXd matrix, double rank_cutoff = kDefaultRankCutoff);

  const BasisPtr& basis() const { return basis_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double rank_cutoff() const { return rank_cutoff_; }
  std::size_t rank() const { return static_cast<std::size_t>(eigenvalues_.size()); }

  /// Retained eigenvalues (ascending) and their eigenvectors (t x rank).
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

  /// Lambda^{-1/2} V^T restricted to the retained spectrum (rank x t).
  const RowMatrix& whitening() const { return whitening_; }
  Eigen::MatrixXd pseudo_inverse() const;
  Eigen::MatrixXd pseudo_sqrt_inv() const;

  /// phi^T M^+ phi, i.e. max over {p : p^T M p <= 1} of (p . phi)^2 on the
  /// retained eigenspace.
  double leverage(std::span<const double> features) const;

  /// Set when the block-agreement selection found no consensus block and the
  /// pooled estimate was returned instead.
  bool used_fallback() const { return used_fallback_; }
  void set_used_fallback(bool value) { used_fallback_ = value; }

 private:
  BasisPtr basis_;
  Eigen::MatrixXd matrix_;
  double rank_cutoff_ = kDefaultRankCutoff;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  RowMatrix whitening_;
  bool used_fallback_ = false;
};

/// Block-agreement estimate of the degree-k monomial correlation matrix.
///
/// The first floor(sqrt(N))^2 points are split into floor(sqrt(N)) blocks of
/// floor(sqrt(N)) points; a block matrix M_i is returned when at least
/// 0.8 floor(sqrt(N)) blocks j satisfy 0.99 M_j <= M_i <= 1.01 M_j in the
/// PSD order. Without such a block the pooled empirical matrix over all used
/// points is returned and used_fallback() is set. `delta` is accepted for
/// interface symmetry; the selection rule does not depend on it.
MomentMatrix estimate_moments(const Dataset& reference, const BasisPtr& basis, double delta);

/// True iff the smallest eigenvalue of (a - b) is at least -tol.
bool psd_dominates(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol);

struct MaxRatioResult {
  Polynomial polynomial;
  double value = 0.0;
};

/// Maximizes p^T Q p subject to p^T M p <= 1: the value is the top eigenvalue
/// of M^{-1/2} Q M^{-1/2} and the maximizer is M^{-1/2} times its eigenvector
/// (pseudo-inverses on the retained spectrum). Throws InvalidArgument for a
/// non-symmetric Q.
MaxRatioResult max_ratio_polynomial(const MomentMatrix& moments, const Eigen::MatrixXd& q);

/// Empirical (1/N) sum phi phi^T over the rows of a feature matrix.
Eigen::MatrixXd empirical_moment_matrix(const RowMatrix& features, double normalizer);

}  // namespace shiftguard
