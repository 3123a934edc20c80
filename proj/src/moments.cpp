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

#include "shiftguard/moments.hpp"

#include <cmath>
#include <vector>

#include "shiftguard/errors.hpp"

namespace shiftguard {

MomentMatrix::MomentMatrix(BasisPtr basis, Eigen::MatrixXd matrix, double rank_cutoff)
    : basis_(std::move(basis)), matrix_(std::move(matrix)), rank_cutoff_(rank_cutoff) {
  const auto t = static_cast<Eigen::Index>(basis_->size());
  if (matrix_.rows() != t || matrix_.cols() != t) throw DimensionError("moment matrix does not match basis size");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_);
  if (solver.info() != Eigen::Success) throw DegenerateError("eigendecomposition of moment matrix failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double largest = values.size() ? values(values.size() - 1) : 0.0;
  Eigen::Index first = 0;
  if (largest > 0.0) {
    while (first < values.size() && values(first) <= rank_cutoff_ * largest) ++first;
  } else {
    first = values.size();
  }
  const Eigen::Index kept = values.size() - first;
  eigenvalues_ = values.tail(kept);
  eigenvectors_ = solver.eigenvectors().rightCols(kept);
  whitening_ = (eigenvalues_.array().rsqrt().matrix().asDiagonal() * eigenvectors_.transpose());
}

Eigen::MatrixXd MomentMatrix::pseudo_inverse() const {
  return eigenvectors_ * eigenvalues_.cwiseInverse().asDiagonal() * eigenvectors_.transpose();
}

Eigen::MatrixXd MomentMatrix::pseudo_sqrt_inv() const {
  return eigenvectors_ * whitening_;
}

double MomentMatrix::leverage(std::span<const double> features) const {
  if (features.size() != basis_->size()) throw DimensionError("feature vector does not match basis size");
  double total = 0.0;
  for (Eigen::Index r = 0; r < whitening_.rows(); ++r) {
    const double z = ordered_dot({whitening_.row(r).data(), features.size()}, features);
    total += z * z;
  }
  return total;
}

bool psd_dominates(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionError("psd_dominates requires square matrices of equal shape");
  }
  if (a.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a - b, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0) >= -tol;
}

Eigen::MatrixXd empirical_moment_matrix(const RowMatrix& features, double normalizer) {
  const Eigen::Index t = features.cols();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(t, t);
  if (features.rows() > 0) {
    m.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose(), 1.0 / normalizer);
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  }
  return m;
}

namespace {

// Diagonal necessary condition for 0.99 M_j <= M_i <= 1.01 M_j.
bool diagonal_bracket(const Eigen::VectorXd& di, const Eigen::VectorXd& dj, double tol_low, double tol_high) {
  for (Eigen::Index a = 0; a < di.size(); ++a) {
    if (di(a) - 0.99 * dj(a) < -tol_low) return false;
    if (1.01 * dj(a) - di(a) < -tol_high) return false;
  }
  return true;
}

}  // namespace

MomentMatrix estimate_moments(const Dataset& reference, const BasisPtr& basis, double delta) {
  if (reference.empty()) throw InvalidArgument("moment estimation needs a non-empty reference sample");
  if (reference.size() < 4) throw InvalidArgument("moment estimation needs at least 4 reference points");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (reference.dim() != basis->dim()) throw DimensionError("reference dimension differs from basis dimension");
  validate_domain(reference);

  const auto blocks = static_cast<std::size_t>(std::sqrt(static_cast<double>(reference.size())));
  const std::size_t used = blocks * blocks;
  const RowMatrix features = basis->features(reference.slice(0, used).points);

  const auto block_rows = [&](std::size_t i) {
    return features.middleRows(static_cast<Eigen::Index>(i * blocks), static_cast<Eigen::Index>(blocks));
  };
  std::vector<Eigen::VectorXd> diagonals(blocks);
  for (std::size_t i = 0; i < blocks; ++i) {
    diagonals[i] = block_rows(i).colwise().squaredNorm().transpose() / static_cast<double>(blocks);
  }
  std::vector<std::optional<Eigen::MatrixXd>> cache(blocks);
  const auto block_matrix = [&](std::size_t i) -> const Eigen::MatrixXd& {
    if (!cache[i]) cache[i] = empirical_moment_matrix(block_rows(i), static_cast<double>(blocks));
    return *cache[i];
  };

  const auto needed = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(blocks)));
  for (std::size_t i = 0; i < blocks; ++i) {
    std::size_t agree = 0;
    for (std::size_t j = 0; j < blocks && agree < needed; ++j) {
      if (agree + (blocks - j) < needed) break;
      const double tol_low = 1e-9 * 0.99 * diagonals[j].sum();
      const double tol_high = 1e-9 * diagonals[i].sum();
      if (!diagonal_bracket(diagonals[i], diagonals[j], tol_low, tol_high)) continue;
      const Eigen::MatrixXd& mi = block_matrix(i);
      const Eigen::MatrixXd& mj = block_matrix(j);
      if (psd_dominates(mi, 0.99 * mj, tol_low) && psd_dominates(1.01 * mj, mi, tol_high)) ++agree;
    }
    if (agree >= needed) return MomentMatrix(basis, block_matrix(i));
  }
  MomentMatrix pooled(basis, empirical_moment_matrix(features, static_cast<double>(used)));
  pooled.set_used_fallback(true);
  return pooled;
}

MaxRatioResult max_ratio_polynomial(const MomentMatrix& moments, const Eigen::MatrixXd& q) {
  const auto t = static_cast<Eigen::Index>(moments.basis()->size());
  if (q.rows() != t || q.cols() != t) throw DimensionError("Q does not match the moment matrix size");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("max_ratio_polynomial requires a symmetric Q");
  }
  const RowMatrix& w = moments.whitening();
  if (w.rows() == 0) return {Polynomial::zero(moments.basis()), 0.0};
  Eigen::MatrixXd sandwiched = w * q * w.transpose();
  sandwiched = 0.5 * (sandwiched + sandwiched.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sandwiched);
  if (solver.info() != Eigen::Success) throw DegenerateError("eigendecomposition of sandwiched matrix failed");
  const Eigen::Index top = sandwiched.rows() - 1;
  Eigen::VectorXd p = w.transpose() * solver.eigenvectors().col(top);
  Eigen::Index pivot = 0;
  p.cwiseAbs().maxCoeff(&pivot);
  if (p(pivot) < 0.0) p = -p;
  return {Polynomial(moments.basis(), std::move(p)), solver.eigenvalues()(top)};
}

}  // namespace shiftguard
