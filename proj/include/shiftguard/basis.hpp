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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace shiftguard {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Domain { Real, Hypercube };

std::string_view to_string(Domain domain);
Domain domain_from_string(std::string_view name);

using Exponent = std::vector<int>;

/// Number of monomials of total degree at most `degree` in `dim` variables;
/// multilinear monomials only for the hypercube.
std::size_t basis_size(int dim, int degree, Domain domain);

/// Degree-bounded monomial basis in graded-lexicographic order.
///
/// Monomials are grouped by total degree (constant first); within a degree
/// they are ordered by descending exponent of x1, then x2, and so on, so
/// d=2, k=2 yields (1, x1, x2, x1^2, x1 x2, x2^2). On the hypercube every
/// exponent is 0 or 1 since x_i^2 = 1 there.
class MonomialBasis {
 public:
  MonomialBasis(int dim, int degree, Domain domain);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  Domain domain() const { return domain_; }
  std::size_t size() const { return exponents_.size(); }

  const std::vector<Exponent>& exponents() const { return exponents_; }
  const Exponent& exponent(std::size_t index) const { return exponents_[index]; }
  std::optional<std::size_t> index_of(const Exponent& exponent) const;

  /// Evaluates every monomial at x. Throws DimensionError on a size mismatch.
  Eigen::VectorXd features(std::span<const double> x) const;
  void features_into(std::span<const double> x, std::span<double> out) const;
  /// Row i of the result is features(points.row(i)).
  RowMatrix features(const RowMatrix& points) const;

  bool operator==(const MonomialBasis& other) const {
    return dim_ == other.dim_ && degree_ == other.degree_ && domain_ == other.domain_;
  }

 private:
  int dim_;
  int degree_;
  Domain domain_;
  std::vector<Exponent> exponents_;
  std::map<Exponent, std::size_t> lookup_;
  // monomial j = monomial parent_[j] * x[variable_[j]] for j > 0
  std::vector<std::size_t> parent_;
  std::vector<int> variable_;
};

using BasisPtr = std::shared_ptr<const MonomialBasis>;

BasisPtr make_basis(int dim, int degree, Domain domain);

}  // namespace shiftguard
