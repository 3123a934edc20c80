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

#include "shiftguard/basis.hpp"

#include <string>

#include "shiftguard/errors.hpp"

namespace shiftguard {

std::string_view to_string(Domain domain) {
  return domain == Domain::Real ? "real" : "hypercube";
}

Domain domain_from_string(std::string_view name) {
  if (name == "real") return Domain::Real;
  if (name == "hypercube") return Domain::Hypercube;
  throw InvalidArgument("unknown domain '" + std::string(name) + "'");
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double value = 1.0;
  for (int i = 1; i <= k; ++i) value = value * (n - k + i) / i;
  return value;
}

// Appends every exponent of total `remaining` over positions [pos, dim) in
// descending-lex order.
void enumerate(int pos, int remaining, int cap, Exponent& current, std::vector<Exponent>& out) {
  const int dim = static_cast<int>(current.size());
  if (pos == dim - 1) {
    if (remaining <= cap) {
      current[pos] = remaining;
      out.push_back(current);
      current[pos] = 0;
    }
    return;
  }
  for (int e = std::min(remaining, cap); e >= 0; --e) {
    current[pos] = e;
    enumerate(pos + 1, remaining - e, cap, current, out);
  }
  current[pos] = 0;
}

}  // namespace

std::size_t basis_size(int dim, int degree, Domain domain) {
  if (domain == Domain::Real) return static_cast<std::size_t>(binomial(dim + degree, degree) + 0.5);
  double total = 0.0;
  for (int j = 0; j <= std::min(degree, dim); ++j) total += binomial(dim, j);
  return static_cast<std::size_t>(total + 0.5);
}

MonomialBasis::MonomialBasis(int dim, int degree, Domain domain)
    : dim_(dim), degree_(degree), domain_(domain) {
  if (dim < 1) throw InvalidArgument("basis dimension must be positive");
  if (degree < 0) throw InvalidArgument("basis degree must be non-negative");
  const int cap = domain == Domain::Hypercube ? 1 : degree;
  Exponent current(dim, 0);
  for (int total = 0; total <= degree; ++total) enumerate(0, total, cap, current, exponents_);

  parent_.assign(exponents_.size(), 0);
  variable_.assign(exponents_.size(), -1);
  for (std::size_t j = 0; j < exponents_.size(); ++j) {
    lookup_.emplace(exponents_[j], j);
    if (j == 0) continue;
    Exponent reduced = exponents_[j];
    int var = 0;
    while (reduced[var] == 0) ++var;
    --reduced[var];
    parent_[j] = lookup_.at(reduced);
    variable_[j] = var;
  }
}

std::optional<std::size_t> MonomialBasis::index_of(const Exponent& exponent) const {
  auto it = lookup_.find(exponent);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void MonomialBasis::features_into(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) + ", basis expects " +
                         std::to_string(dim_));
  }
  if (out.size() != exponents_.size()) throw DimensionError("feature buffer has wrong length");
  out[0] = 1.0;
  for (std::size_t j = 1; j < exponents_.size(); ++j) out[j] = out[parent_[j]] * x[variable_[j]];
}

Eigen::VectorXd MonomialBasis::features(std::span<const double> x) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  features_into(x, std::span<double>(out.data(), size()));
  return out;
}

RowMatrix MonomialBasis::features(const RowMatrix& points) const {
  if (points.cols() != dim_) throw DimensionError("point matrix has the wrong number of columns");
  RowMatrix out(points.rows(), static_cast<Eigen::Index>(size()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    features_into(std::span<const double>(points.row(i).data(), static_cast<std::size_t>(dim_)),
                  std::span<double>(out.row(i).data(), size()));
  }
  return out;
}

BasisPtr make_basis(int dim, int degree, Domain domain) {
  return std::make_shared<const MonomialBasis>(dim, degree, domain);
}

}  // namespace shiftguard
