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

#include "shiftguard/polynomial.hpp"

#include <cmath>

#include "shiftguard/errors.hpp"

namespace shiftguard {

double ordered_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot product of vectors with different lengths");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Polynomial::Polynomial(BasisPtr basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (!basis_) throw InvalidArgument("polynomial requires a basis");
  if (static_cast<std::size_t>(coefficients_.size()) != basis_->size()) {
    throw DimensionError("coefficient vector length differs from basis size");
  }
}

Polynomial Polynomial::zero(BasisPtr basis) {
  const auto t = static_cast<Eigen::Index>(basis->size());
  return Polynomial(std::move(basis), Eigen::VectorXd::Zero(t));
}

double Polynomial::eval(std::span<const double> x) const {
  const Eigen::VectorXd phi = basis_->features(x);
  return eval_features({phi.data(), static_cast<std::size_t>(phi.size())});
}

double Polynomial::eval_features(std::span<const double> features) const {
  return ordered_dot(features, {coefficients_.data(), static_cast<std::size_t>(coefficients_.size())});
}

std::vector<std::vector<double>> normalized_hermite_coefficients(int max_degree) {
  // He_{n+1}(x) = x He_n(x) - n He_{n-1}(x)
  std::vector<std::vector<double>> he(static_cast<std::size_t>(max_degree) + 1);
  he[0] = {1.0};
  if (max_degree >= 1) he[1] = {0.0, 1.0};
  for (int n = 1; n < max_degree; ++n) {
    std::vector<double> next(static_cast<std::size_t>(n) + 2, 0.0);
    for (int j = 0; j <= n; ++j) next[j + 1] += he[n][j];
    for (int j = 0; j <= n - 1; ++j) next[j] -= n * he[n - 1][j];
    he[n + 1] = std::move(next);
  }
  double factorial = 1.0;
  for (int n = 0; n <= max_degree; ++n) {
    if (n > 0) factorial *= n;
    const double scale = 1.0 / std::sqrt(factorial);
    for (double& c : he[n]) c *= scale;
  }
  return he;
}

namespace {

// Expands prod_i h[r_i](x_i) into the basis, visiting every s <= r
// coordinatewise.
void expand_product(const MonomialBasis& basis, const std::vector<std::vector<double>>& h, const Exponent& r,
                    std::size_t pos, Exponent& s, double weight, Eigen::VectorXd& out) {
  if (pos == r.size()) {
    out(static_cast<Eigen::Index>(*basis.index_of(s))) += weight;
    return;
  }
  const auto& coeffs = h[static_cast<std::size_t>(r[pos])];
  for (std::size_t e = 0; e < coeffs.size(); ++e) {
    if (coeffs[e] == 0.0) continue;
    s[pos] = static_cast<int>(e);
    expand_product(basis, h, r, pos + 1, s, weight * coeffs[e], out);
  }
  s[pos] = 0;
}

}  // namespace

std::vector<Polynomial> orthonormal_test_basis(const BasisPtr& basis, Reference reference) {
  const bool gaussian = reference == Reference::GaussianStd;
  if (gaussian && basis->domain() != Domain::Real) {
    throw InvalidArgument("Gaussian reference requires the real domain");
  }
  if (!gaussian && basis->domain() != Domain::Hypercube) {
    throw InvalidArgument("uniform hypercube reference requires the hypercube domain");
  }
  const auto t = static_cast<Eigen::Index>(basis->size());
  std::vector<Polynomial> out;
  out.reserve(basis->size());
  if (!gaussian) {
    for (Eigen::Index j = 0; j < t; ++j) out.emplace_back(basis, Eigen::VectorXd::Unit(t, j));
    return out;
  }
  const auto hermite = normalized_hermite_coefficients(basis->degree());
  for (const Exponent& r : basis->exponents()) {
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(t);
    Exponent s(r.size(), 0);
    expand_product(*basis, hermite, r, 0, s, 1.0, coeffs);
    out.emplace_back(basis, std::move(coeffs));
  }
  return out;
}

}  // namespace shiftguard
