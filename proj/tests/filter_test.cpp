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

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "shiftguard/errors.hpp"
#include "shiftguard/filter.hpp"
#include "shiftguard/synth.hpp"

namespace shiftguard {
namespace {

Dataset with_far_copies(Dataset data, std::size_t count, std::vector<double> point) {
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < point.size(); ++j) data.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = point[j];
  }
  return data;
}

// Largest generalized eigenvalue of (accepted moments, reference moments), computed without the library.
double sandwiched_accepted_value(const Dataset& target, const FilterOutcome& out) {
  const MomentMatrix& m = out.selector.moments();
  const BasisPtr& b = m.basis();
  const auto t = static_cast<Eigen::Index>(b->size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(t, t);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!out.accepted_mask[i]) continue;
    const Eigen::VectorXd phi = b->features(target.row(i));
    q += phi * phi.transpose();
  }
  q /= static_cast<double>(target.size());
  return Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>(q, m.matrix()).eigenvalues().maxCoeff();
}

TEST(FilterParameters, Defaults) {
  FilterConfig c;
  c.epsilon = 0.1;
  const FilterParameters p = resolve_filter_parameters(c, 6, 20000);
  EXPECT_DOUBLE_EQ(p.clip_bound, 4.0 * 216.0 / 0.1);
  const double theory = 200.0 * std::sqrt(36.0 * (std::log(20000.0) / 20000.0) * std::log(10.0));
  EXPECT_DOUBLE_EQ(p.slack, std::min(theory, 1.0 / p.clip_bound));
  EXPECT_DOUBLE_EQ(p.stop_threshold, 50.0 * (1.0 + p.slack * p.clip_bound));
  EXPECT_LE(p.stop_threshold, 100.0);
  c.clip_bound_override = 10.0;
  c.slack_override = 0.5;
  c.alpha = 0.5;
  const FilterParameters o = resolve_filter_parameters(c, 6, 20000);
  EXPECT_DOUBLE_EQ(o.clip_bound, 10.0);
  EXPECT_DOUBLE_EQ(o.stop_threshold, 100.0 * 6.0);
  c.alpha = 0.0;
  EXPECT_THROW(resolve_filter_parameters(c, 6, 100), InvalidArgument);
}

TEST(Selector, NoRoundsInfiniteClipAcceptsEverything) {
  const BasisPtr b = make_basis(2, 1, Domain::Real);
  const Selector g(MomentMatrix(b, Eigen::MatrixXd::Identity(3, 3)), std::numeric_limits<double>::infinity(), {});
  EXPECT_EQ(g.evaluate(std::vector<double>{1e6, -1e6}), 1);
  EXPECT_EQ(evaluate_selector(g, std::vector<double>{0.0, 0.0}), 1);
  EXPECT_EQ(smoothness_check(g, Dataset{RowMatrix(0, 2), Domain::Real}), 0.0);
}

TEST(Selector, SingleRoundThreshold) {
  const BasisPtr b = make_basis(2, 1, Domain::Real);
  const Polynomial x1(b, Eigen::Vector3d(0.0, 1.0, 0.0));
  const Selector g(MomentMatrix(b, Eigen::MatrixXd::Identity(3, 3)), 100.0, {{x1, 4.0}});
  EXPECT_EQ(g.evaluate(std::vector<double>{3.0, 0.0}), 0);
  EXPECT_EQ(g.evaluate(std::vector<double>{1.0, 0.0}), 1);
  EXPECT_EQ(g.evaluate(std::vector<double>{1.0, 9.0}), 1);
  EXPECT_EQ(g.evaluate(std::vector<double>{1.0, 10.0}), 0);  // leverage 102 > 100
  EXPECT_THROW(Selector(MomentMatrix(b, Eigen::MatrixXd::Identity(3, 3)), 1.0, {{x1, -1.0}}), InvalidArgument);
  EXPECT_THROW(g.evaluate(std::vector<double>{1.0}), DimensionError);
}

TEST(Selector, MatchesBruteForceConditions) {
  Rng rng(31);
  const BasisPtr b = make_basis(2, 2, Domain::Real);
  Eigen::MatrixXd a(6, 6);
  for (Eigen::Index i = 0; i < 36; ++i) a.data()[i] = rng.normal();
  const Eigen::MatrixXd m = a * a.transpose() + Eigen::MatrixXd::Identity(6, 6);
  std::vector<FilterRound> rounds;
  for (int r = 0; r < 4; ++r) {
    Eigen::VectorXd c(6);
    for (Eigen::Index i = 0; i < 6; ++i) c[i] = rng.normal();
    rounds.push_back({Polynomial(b, c), 2.0 + 4.0 * rng.uniform()});
  }
  const double clip = 3.0;
  const Selector g(MomentMatrix(b, m), clip, rounds);
  const Eigen::MatrixXd inv = m.inverse();
  int rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x = {1.5 * rng.normal(), 1.5 * rng.normal()};
    Eigen::VectorXd phi(6);
    for (std::size_t r = 0; r < 6; ++r) phi[static_cast<Eigen::Index>(r)] = testing::monomial(x, b->exponent(r));
    bool reject = phi.dot(inv * phi) > clip;
    for (const FilterRound& round : rounds) {
      const double v = round.polynomial.coefficients().dot(phi);
      reject = reject || v * v > round.threshold;
    }
    rejected += reject ? 1 : 0;
    EXPECT_EQ(g.evaluate(x), reject ? 0 : 1) << i;
  }
  EXPECT_GT(rejected, 0);
  EXPECT_LT(rejected, 1000);
}

TEST(RunFilter, CleanTargetRejectsLittle) {
  const Dataset ref = Generator::gaussian(2, 41).sample(20000, 0);
  FilterConfig c;
  c.alpha = 0.5;
  const FilterOutcome out = run_filter(ref, ref, c);
  EXPECT_LE(out.rejected_fraction(), 0.1);
  EXPECT_LE(out.rounds.size(), 2u);
}

TEST(RunFilter, InBoundsTargetStopsImmediately) {
  const Dataset ref = Generator::gaussian(2, 42).sample(10000, 0);
  const Dataset target = Generator::gaussian(2, 42).sample(10000, 1);
  const FilterOutcome out = run_filter(ref, target, FilterConfig{});
  EXPECT_TRUE(out.rounds.empty());
  EXPECT_EQ(out.selector.round_count(), 0u);
  EXPECT_EQ(out.accepted_count(), target.size());
}

TEST(RunFilter, FarCopiesAreRejected) {
  const Dataset ref = Generator::gaussian(2, 43).sample(20000, 0);
  const Dataset target = with_far_copies(Generator::gaussian(2, 43).sample(20000, 1), 2000, {50.0, 0.0});
  FilterConfig c;
  c.alpha = 0.5;
  const FilterOutcome out = run_filter(ref, target, c);
  std::size_t clean_rejected = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (i < 2000) {
      EXPECT_FALSE(out.accepted_mask[i]);
    } else {
      clean_rejected += out.accepted_mask[i] ? 0 : 1;
    }
  }
  EXPECT_LE(static_cast<double>(clean_rejected), (0.5 * 0.1 + 0.05) * 20000 + 3 * std::sqrt(20000.0));
}

TEST(RunFilter, AllAdversarialEndsBounded) {
  const Dataset ref = Generator::gaussian(2, 44).sample(2000, 0);
  const Dataset target = with_far_copies(Generator::gaussian(2, 44).sample(2000, 1), 2000, {30.0, -30.0});
  const FilterOutcome out = run_filter_adversarial(ref, target, FilterConfig{});
  EXPECT_EQ(out.accepted_count(), 0u);
  EXPECT_TRUE(out.emptied);
  EXPECT_LE(out.final_value, out.parameters.stop_threshold);
}

TEST(RunFilter, InvariantsAcrossCorruptionLevels) {
  for (int s = 0; s < 6; ++s) {
    const std::uint64_t seed = derive_seed(77, static_cast<std::uint64_t>(s));
    const std::size_t n = 3000;
    const Dataset ref = Generator::gaussian(2, seed).sample(n, 0);
    const double rate = std::array<double, 6>{0.0, 0.02, 0.1, 0.3, 0.5, 1.0}[static_cast<std::size_t>(s)];
    const Corruption bad = corrupt(Generator::gaussian(2, seed).sample(n, 1), Adversary::replace_far(rate, 2, 2000.0, seed));
    FilterConfig c;
    c.alpha = s % 2 == 0 ? 1.0 : 0.5;
    const FilterOutcome out = run_filter(ref, bad.data.x, c);
    // accepted mask equals selector evaluation
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(out.accepted_mask[i], out.selector.evaluate(bad.data.x.row(i)) == 1);
    // stopping soundness
    EXPECT_LE(sandwiched_accepted_value(bad.data.x, out), out.parameters.stop_threshold + 1e-6);
    // monotone progress and round bound
    for (const RoundLog& r : out.rounds) EXPECT_GT(r.removed, 0u);
    EXPECT_LE(out.rounds.size(), n);
    const double t = static_cast<double>(out.parameters.basis_size);
    EXPECT_LE(static_cast<double>(out.rounds.size()), 10.0 * t * std::log2(out.parameters.clip_bound * t));
    for (const FilterRound& r : out.selector.rounds()) EXPECT_GE(r.threshold, 0.0);
    // boundedness transfer for the orthonormal test basis
    for (const Polynomial& q : orthonormal_test_basis(out.selector.basis(), Reference::GaussianStd)) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!out.accepted_mask[i]) continue;
        const double v = q.eval(bad.data.x.row(i));
        sum += v * v;
      }
      EXPECT_LE(sum / static_cast<double>(n), 200.0 / c.alpha);
    }
  }
}

TEST(RunFilter, Deterministic) {
  const Dataset ref = Generator::gaussian(3, 5).sample(4000, 0);
  const Corruption bad = corrupt(Generator::gaussian(3, 5).sample(4000, 1), Adversary::replace_far(0.1, 2, 1000.0, 5));
  const FilterOutcome a = run_filter(ref, bad.data.x, FilterConfig{});
  const FilterOutcome b = run_filter(ref, bad.data.x, FilterConfig{});
  EXPECT_EQ(a.accepted_mask, b.accepted_mask);
  EXPECT_EQ(a.final_value, b.final_value);
  ASSERT_EQ(a.selector.round_count(), b.selector.round_count());
  for (std::size_t i = 0; i < a.selector.round_count(); ++i) {
    EXPECT_EQ(a.selector.rounds()[i].threshold, b.selector.rounds()[i].threshold);
    EXPECT_EQ(a.selector.rounds()[i].polynomial.coefficients(), b.selector.rounds()[i].polynomial.coefficients());
  }
}

TEST(RunFilter, RoundCap) {
  const Dataset ref = Generator::gaussian(3, 6).sample(3000, 0);
  // Two clusters on orthogonal axes at different scales take separate rounds.
  Dataset target = with_far_copies(Generator::gaussian(3, 6).sample(3000, 1), 300, {0.0, 0.0, 30.0});
  for (Eigen::Index i = 300; i < 600; ++i) target.points.row(i) << 10.0, 0.0, 0.0;
  FilterConfig c;
  c.clip_bound_override = 1e15;
  const FilterOutcome free = run_filter(ref, target, c);
  ASSERT_GE(free.rounds.size(), 2u);
  EXPECT_FALSE(free.hit_round_cap);
  c.max_rounds = 1;
  const FilterOutcome capped = run_filter(ref, target, c);
  EXPECT_EQ(capped.rounds.size(), 1u);
  EXPECT_TRUE(capped.hit_round_cap);
  EXPECT_GT(capped.final_value, capped.parameters.stop_threshold);
}

TEST(RunFilter, Errors) {
  const Dataset a = Generator::gaussian(2, 1).sample(100);
  EXPECT_THROW(run_filter(a, Generator::gaussian(3, 1).sample(100), FilterConfig{}), DimensionError);
  EXPECT_THROW(run_filter(a, a.slice(0, 3), FilterConfig{}), InvalidArgument);
  EXPECT_THROW(run_filter(a, Generator::hypercube(2, 1).sample(100), FilterConfig{}), InvalidArgument);
}

TEST(Smoothness, ConditionedHalfStaysWithinSlack) {
  const Generator base = Generator::gaussian(2, 51);
  const Dataset ref = base.sample(20000, 0);
  const Generator half = Generator::conditioned_half(base, {1.0, 0.0}, 52);
  const FilterOutcome out = run_filter(ref, half.sample(20000, 1), FilterConfig{});
  const double slack = 3.0 * std::sqrt(std::log(10.0) / (2.0 * 20000.0));
  EXPECT_LE(smoothness_check(out.selector, half.sample(20000, 2)), 0.05 + slack);
  EXPECT_LE(smoothness_check(out.selector, base.sample(20000, 3)), 0.05 + slack);
}

}  // namespace
}  // namespace shiftguard
