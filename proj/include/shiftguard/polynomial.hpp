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

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shiftguard/basis.hpp"

namespace shiftguard {

/// Sum of a[i] * b[i] accumulated left to right. Every code path that must
/// agree bit-for-bit (filter rounds vs. selector evaluation) goes through it.
double ordered_dot(std::span<const double> a, std::span<const double> b);

/// p(x) = sum_r coef_r x^r over a fixed monomial basis.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(BasisPtr basis, Eigen::VectorXd coefficients);
  static Polynomial zero(BasisPtr basis);

  const BasisPtr& basis() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  double eval(std::span<const double> x) const;
  /// Evaluation from precomputed basis features of x.
  double eval_features(std::span<const double> features) const;

 private:
  BasisPtr basis_;
  Eigen::VectorXd coefficients_;
};

enum class Reference { GaussianStd, HypercubeUniform };

/// Polynomials orthonormal under the reference distribution, one per basis
/// element: products of normalized probabilists' Hermite polynomials for the
/// standard Gaussian, parity characters for the uniform hypercube.
/// Throws InvalidArgument when the reference does not match the basis domain.
std::vector<Polynomial> orthonormal_test_basis(const BasisPtr& basis, Reference reference);

/// Coefficients of He_n / sqrt(n!) in powers of x, for n = 0..max_degree.
std::vector<std::vector<double>> normalized_hermite_coefficients(int max_degree);

}  // namespace shiftguard
