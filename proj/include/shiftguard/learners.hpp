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
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "shiftguard/dataset.hpp"
#include "shiftguard/filter.hpp"
#include "shiftguard/regression.hpp"

namespace shiftguard {

/// sign(w . x + tau) with unit w.
struct Halfspace {
  Eigen::VectorXd w;
  double tau = 0.0;

  int predict(std::span<const double> x) const;
};

struct ConstantHypothesis {
  int value = 1;

  int predict(std::span<const double>) const { return value; }
};

/// Rejects x iff some pair in the ball {(w, t) : ||(w, t) - (w_hat, tau_hat)|| <= r}
/// disagrees on x, which is exactly |w_hat . x + tau_hat| <= r (||x|| + 1).
class DisagreementSelector {
 public:
  DisagreementSelector(Eigen::VectorXd w, double tau, double radius);

  const Eigen::VectorXd& w() const { return w_; }
  double tau() const { return tau_; }
  double radius() const { return radius_; }
  int evaluate(std::span<const double> x) const;

 private:
  Eigen::VectorXd w_;
  double tau_;
  double radius_;
};

struct AcceptAll {
  int evaluate(std::span<const double>) const { return 1; }
};

using Hypothesis = std::variant<PolynomialHypothesis, Halfspace, ConstantHypothesis>;
using AnySelector = std::variant<AcceptAll, Selector, DisagreementSelector>;

int predict(const Hypothesis& h, std::span<const double> x);
int evaluate(const AnySelector& g, std::span<const double> x);
/// Fraction of rows with g = 0; 0 for an empty dataset.
double rejection_rate(const AnySelector& g, const Dataset& data);
/// Error of h among rows with g = 1; 0 when nothing is selected.
double selected_error(const Hypothesis& h, const AnySelector& g, const LabeledDataset& data);
double error_rate(const Hypothesis& h, const LabeledDataset& data);

/// Universal constants left unspecified by the analysis.
struct LearnerConstants {
  double c1 = 10.0;
  double c2 = 2.0;
  double c3 = 4.0;
  double c_tds = 10.0;
  double c_testable = 10.0;
};

enum class PqBranch { LowFrequency, Recovery, Homogeneous, Sandwich };
std::string_view to_string(PqBranch branch);

struct PqDiagnostics {
  PqBranch branch = PqBranch::Sandwich;
  double min_label_frequency = 0.0;
  std::size_t filter_rounds = 0;
  double filter_final_value = 0.0;
  std::size_t filter_clipped = 0;
  /// Filter target points rejected, or the calibrated Gaussian rejection
  /// for the homogeneous learner.
  double target_rejection = 0.0;
  std::size_t recovery_trials = 0;
  std::size_t selected_candidate = 0;
  double radius = 0.0;
  int degree = 0;
};

struct PqOutput {
  Hypothesis h;
  AnySelector g;
  PqDiagnostics diagnostics;
};

enum class Verdict { Accept, Reject };
std::string_view to_string(Verdict verdict);

struct TdsOutput {
  Verdict verdict = Verdict::Reject;
  std::optional<Hypothesis> h;  // present iff accepted
  double estimated_rejection_rate = 0.0;
  double rejection_threshold = 0.0;
  AnySelector g;
  std::size_t filter_rounds = 0;
  /// Points left for regression after conditioning on g = 1 (testable only).
  std::size_t conditioned_size = 0;
};

enum class ConceptClassTag { HalfspaceIntersection, DecisionTree, Formula, Custom };
std::string_view to_string(ConceptClassTag tag);
ConceptClassTag concept_class_from_string(std::string_view name);

struct ConceptClass {
  ConceptClassTag tag = ConceptClassTag::DecisionTree;
  /// s: tree or formula size.
  int size = 1;
  /// l: number of halfspaces, or formula depth.
  int count = 1;
  /// Passthrough values for the custom tag.
  int custom_degree = 1;
  double custom_coefficient_bound = 1.0;
  std::size_t custom_sample_size = 1;
};

struct ReasonablePairConfig {
  ConceptClass concept_class;
  double epsilon = 0.1;
  int degree = 1;
  double coefficient_bound = 1.0;
  std::size_t sample_size = 1;
};

struct SandwichParameters {
  int degree = 1;
  double coefficient_bound = 1.0;
  std::size_t sample_size = 1;
};

/// Degree from the sandwiching lemmas with hidden constants set to
/// `constant`: decision trees ceil(c log2(s/eps)), intersections of l
/// halfspaces ceil(c l^6 / eps^2), formulas ceil((c log2(s/eps))^(5l/2) sqrt(s)).
/// B = t^2 for the basis of that degree and m = ceil((d k)^k / delta), saturating.
SandwichParameters sandwich_degree_lookup(const ConceptClass& concept_class, double epsilon, int dim, Domain domain,
                                          double delta, double constant = 1.0);

ReasonablePairConfig make_reasonable_pair(const ConceptClass& concept_class, double epsilon, int dim, Domain domain,
                                          double delta);

/// w = normalize(sum x y); tau is the candidate -w.x_j with the fewest
/// training errors of sign(w . x + tau).
Halfspace recover_halfspace(const LabeledDataset& data);

/// Index of argmin_i sum_j ||c_i - c_j||, ties to the lowest index.
std::size_t amplify_index(std::span<const Eigen::VectorXd> candidates);
Eigen::VectorXd amplify(std::span<const Eigen::VectorXd> candidates);

PqOutput pq_learn_halfspace(const LabeledDataset& train, const Dataset& test, double epsilon, double delta,
                            const LearnerConstants& constants = {});

/// Homogeneous halfspaces; uses no test data. The radius starts at
/// eps / sqrt(d) and is bisected down until a seeded Gaussian Monte-Carlo
/// estimate of the rejection rate is at most eps.
PqOutput pq_learn_homogeneous(const LabeledDataset& train, double epsilon, double delta,
                              std::uint64_t calibration_seed = 0x5eed);

PqOutput pq_learn_sandwich(const LabeledDataset& train, const Dataset& test, const ReasonablePairConfig& pair,
                           double epsilon, double eta, double delta);

struct AdversarialPqOutput {
  std::vector<std::size_t> accepted;
  PolynomialHypothesis h;
  FilterOutcome filter;
};

AdversarialPqOutput pq_learn_adversarial(const LabeledDataset& train, const Dataset& test,
                                         const ReasonablePairConfig& pair, double epsilon, double eta, double delta);

/// ceil((2 / eps^2) ln(4 / delta))
std::size_t estimation_sample_size(double epsilon, double delta);

/// The last estimation_sample_size points of `test` estimate the rejection
/// rate; the rest are the filter target.
TdsOutput tds_learn(const LabeledDataset& train, const Dataset& test, const ReasonablePairConfig& pair, double epsilon,
                    double theta, double delta, const LearnerConstants& constants = {});

/// Rejects iff the rejection rate of pq.g on `test` exceeds eta + theta + eps/2.
TdsOutput pq_to_tds(const PqOutput& pq, const Dataset& test, double eta, double theta, double epsilon, double delta);

/// The labeled sample is split into an estimation block (the last
/// estimation_sample_size points), a filter block and a regression block
/// (the two halves of the rest).
TdsOutput testable_learn(const LabeledDataset& labeled, const Dataset& reference, const ReasonablePairConfig& pair,
                         double epsilon, double theta, double delta, const LearnerConstants& constants = {});

struct NastyOutput {
  PolynomialHypothesis h;
  std::vector<std::size_t> accepted;
  std::size_t filter_rounds = 0;
};

NastyOutput nasty_learn(const LabeledDataset& data, const Dataset& reference, const ReasonablePairConfig& pair,
                        double epsilon, double delta, const LearnerConstants& constants = {});

}  // namespace shiftguard
