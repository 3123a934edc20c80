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

#include "shiftguard/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "shiftguard/errors.hpp"

namespace shiftguard {

int PolynomialHypothesis::predict(std::span<const double> x) const {
  return sign_of(polynomial_.eval(x) - threshold_);
}

int PolynomialHypothesis::predict_features(std::span<const double> features) const {
  return sign_of(polynomial_.eval_features(features) - threshold_);
}

namespace {

void check_input(const LabeledDataset& data, const RegressionConfig& config) {
  if (data.size() == 0) throw InvalidArgument("regression needs a nonempty dataset");
  validate_labels(data);
  validate_domain(data.x);
  if (config.degree < 0) throw InvalidArgument("regression degree must be non-negative");
  if (!(config.coefficient_bound > 0.0) || !std::isfinite(config.coefficient_bound)) {
    throw InvalidArgument("coefficient bound must be positive and finite");
  }
  if (config.tolerance && !(*config.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (config.max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
}

Eigen::VectorXd labels_vector(const LabeledDataset& data) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y[static_cast<Eigen::Index>(i)] = data.y[i];
  return y;
}

Eigen::VectorXd clip(const Eigen::VectorXd& p, double bound) { return p.cwiseMax(-bound).cwiseMin(bound); }

double top_eigenvalue(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

// Box-constrained minimizer of c + p^T G p - 2 b^T p by projected gradient,
// starting from `start`. Returns the final iterate; appends objectives.
struct QuadraticSolve {
  Eigen::VectorXd p;
  double objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

double quadratic_value(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, double c, const Eigen::VectorXd& p) {
  return c + p.dot(g * p) - 2.0 * b.dot(p);
}

// max over the box of grad . (p - s): sum g_i p_i + B |g_i|
double frank_wolfe_gap(const Eigen::VectorXd& grad, const Eigen::VectorXd& p, double bound) {
  return grad.dot(p) + bound * grad.cwiseAbs().sum();
}

QuadraticSolve solve_box_quadratic(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, double c, double bound,
                                   Eigen::VectorXd start, double tolerance, int max_iterations,
                                   std::vector<double>* history) {
  QuadraticSolve out;
  out.p = std::move(start);
  out.objective = quadratic_value(g, b, c, out.p);
  if (history) history->push_back(out.objective);
  const double lipschitz = 2.0 * top_eigenvalue(g);
  Eigen::VectorXd grad = 2.0 * (g * out.p - b);
  out.gap = frank_wolfe_gap(grad, out.p, bound);
  if (!(lipschitz > 0.0)) return out;
  const double step = 1.0 / lipschitz;
  while (out.gap > tolerance && out.iterations < max_iterations) {
    Eigen::VectorXd next = clip(out.p - step * grad, bound);
    const double value = quadratic_value(g, b, c, next);
    ++out.iterations;
    if (value > out.objective) break;  // rounding floor
    out.p = std::move(next);
    out.objective = value;
    if (history) history->push_back(value);
    grad = 2.0 * (g * out.p - b);
    out.gap = frank_wolfe_gap(grad, out.p, bound);
  }
  return out;
}

Eigen::VectorXd clipped_unconstrained(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, double bound) {
  Eigen::VectorXd p = g.ldlt().solve(b);
  if (!p.allFinite()) p.setZero();
  return clip(p, bound);
}

}  // namespace

RegressionResult l2_box_regression(const LabeledDataset& data, const RegressionConfig& config) {
  check_input(data, config);
  const BasisPtr basis = make_basis(data.dim(), config.degree, data.x.domain);
  const RowMatrix f = basis->features(data.x.points);
  const Eigen::VectorXd y = labels_vector(data);
  const double n = static_cast<double>(data.size());
  const Eigen::MatrixXd g = (f.transpose() * f) / n;
  const Eigen::VectorXd b = (f.transpose() * y) / n;
  const double c = y.squaredNorm() / n;

  RegressionResult result;
  result.tolerance = config.tolerance.value_or(1e-5 * (1.0 + c));
  Eigen::VectorXd start = clipped_unconstrained(g, b, config.coefficient_bound);
  if (quadratic_value(g, b, c, start) > c) start.setZero();
  QuadraticSolve solved = solve_box_quadratic(g, b, c, config.coefficient_bound, std::move(start),
                                              result.tolerance, config.max_iterations, &result.history);
  result.polynomial = Polynomial(basis, std::move(solved.p));
  result.objective = solved.objective;
  result.certificate = solved.gap;
  result.iterations = solved.iterations;
  result.converged = solved.gap <= result.tolerance;
  return result;
}

ThresholdScan best_threshold(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw DimensionError("threshold scan needs one label per value");
  if (values.empty()) throw InvalidArgument("threshold scan needs at least one value");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  // Threshold below everything: all predicted +1, errors are the -1 labels.
  std::size_t errors = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), -1));
  ThresholdScan best{values[order.front()] - 1.0, errors};
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = values[order[i]];
    // Move every point with value v to the predicted -1 side.
    while (i < order.size() && values[order[i]] == v) {
      if (labels[order[i]] == 1) {
        ++errors;
      } else {
        --errors;
      }
      ++i;
    }
    const double candidate = i < order.size() ? 0.5 * (v + values[order[i]]) : v + 1.0;
    if (errors < best.errors) best = {candidate, errors};
  }
  return best;
}

L1RegressionResult l1_regression_with_threshold(const LabeledDataset& data, const RegressionConfig& config) {
  check_input(data, config);
  const BasisPtr basis = make_basis(data.dim(), config.degree, data.x.domain);
  const RowMatrix f = basis->features(data.x.points);
  const Eigen::VectorXd y = labels_vector(data);
  const double n = static_cast<double>(data.size());
  const double bound = config.coefficient_bound;
  const Eigen::Index t = static_cast<Eigen::Index>(basis->size());

  RegressionResult fit;
  // Initial iterate p = 0 has objective mean |y| = 1.
  fit.tolerance = config.tolerance.value_or(1e-5 * 2.0);
  const double s = fit.tolerance;
  const auto smoothed = [&](const Eigen::VectorXd& r) { return (r.array().square() + s * s).sqrt().sum() / n; };

  Eigen::VectorXd p = Eigen::VectorXd::Zero(t);
  Eigen::VectorXd residual = y;
  double value = smoothed(residual);
  fit.history.push_back(value);
  fit.certificate = value;
  const int max_iterations = std::min(config.max_iterations, 200);
  while (fit.iterations < max_iterations) {
    ++fit.iterations;
    // Quadratic majorizer at p: (1/n) sum w_i r_i^2 / 2 + const, w_i = 1/sqrt(r_i^2 + s^2).
    const Eigen::VectorXd w = (residual.array().square() + s * s).sqrt().inverse().matrix();
    const Eigen::MatrixXd g = (f.transpose() * w.asDiagonal() * f) / (2.0 * n);
    const Eigen::VectorXd b = (f.transpose() * w.cwiseProduct(y)) / (2.0 * n);
    const double c = w.dot(y.cwiseProduct(y)) / (2.0 * n);
    Eigen::VectorXd start = p;
    Eigen::VectorXd jump = clipped_unconstrained(g, b, bound);
    if (quadratic_value(g, b, c, jump) < quadratic_value(g, b, c, start)) start = std::move(jump);
    QuadraticSolve inner = solve_box_quadratic(g, b, c, bound, std::move(start), s, 50, nullptr);
    Eigen::VectorXd next_residual = y - f * inner.p;
    const double next_value = smoothed(next_residual);
    if (!(next_value < value)) {
      fit.certificate = 0.0;
      fit.converged = true;
      break;
    }
    const double decrease = value - next_value;
    p = std::move(inner.p);
    residual = std::move(next_residual);
    value = next_value;
    fit.history.push_back(value);
    fit.certificate = decrease;
    if (decrease <= fit.tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.objective = residual.cwiseAbs().sum() / n;

  std::vector<double> values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    values[i] = ordered_dot({f.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(t)},
                            {p.data(), static_cast<std::size_t>(t)});
  }
  fit.polynomial = Polynomial(basis, std::move(p));
  const ThresholdScan scan = best_threshold(values, data.y);
  L1RegressionResult out;
  out.hypothesis = PolynomialHypothesis(fit.polynomial, scan.threshold);
  out.fit = std::move(fit);
  out.training_error = static_cast<double>(scan.errors) / n;
  return out;
}

}  // namespace shiftguard
