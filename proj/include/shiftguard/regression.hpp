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

#include <optional>
#include <span>
#include <vector>

#include "shiftguard/dataset.hpp"
#include "shiftguard/polynomial.hpp"

namespace shiftguard {

struct RegressionConfig {
  int degree = 2;
  /// Every coefficient is confined to [-B, B].
  double coefficient_bound = 1.0;
  /// Unset means 1e-5 * (1 + initial objective).
  std::optional<double> tolerance;
  int max_iterations = 20000;
};

/// sign(p(x) - threshold) with sign(0) = +1.
class PolynomialHypothesis {
 public:
  PolynomialHypothesis() = default;
  PolynomialHypothesis(Polynomial polynomial, double threshold)
      : polynomial_(std::move(polynomial)), threshold_(threshold) {}

  const Polynomial& polynomial() const { return polynomial_; }
  double threshold() const { return threshold_; }
  int predict(std::span<const double> x) const;
  int predict_features(std::span<const double> features) const;

 private:
  Polynomial polynomial_;
  double threshold_ = 0.0;
};

inline int sign_of(double v) { return v >= 0.0 ? 1 : -1; }

struct RegressionResult {
  Polynomial polynomial;
  double objective = 0.0;
  /// Objective after every accepted iterate; non-increasing.
  std::vector<double> history;
  /// Optimality certificate compared against the tolerance: the Frank-Wolfe
  /// gap for L2, the last objective decrease for L1.
  double certificate = 0.0;
  double tolerance = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct L1RegressionResult {
  PolynomialHypothesis hypothesis;
  RegressionResult fit;
  double training_error = 0.0;
};

/// Least squares (1/n) sum (y - p(x))^2 over coefficient vectors in the box,
/// by projected gradient with step 1 / (2 lambda_max(G)) from the clipped
/// unconstrained solution.
RegressionResult l2_box_regression(const LabeledDataset& data, const RegressionConfig& config);

/// Least absolute deviation (1/n) sum |y - p(x)| over the box, solved as the
/// smoothed problem sum sqrt(r^2 + s^2) with s equal to the tolerance by
/// iteratively reweighted least squares, followed by the best empirical
/// threshold for sign(p(x) - t).
L1RegressionResult l1_regression_with_threshold(const LabeledDataset& data, const RegressionConfig& config);

struct ThresholdScan {
  double threshold = 0.0;
  std::size_t errors = 0;
};

/// Candidates are one value below the minimum, midpoints between consecutive
/// distinct values, and one value above the maximum; the first candidate (in
/// ascending order) with the fewest errors is returned.
ThresholdScan best_threshold(std::span<const double> values, std::span<const int> labels);

}  // namespace shiftguard
