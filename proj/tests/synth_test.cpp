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
#include <map>

#include "oracles.hpp"
#include "shiftguard/errors.hpp"
#include "shiftguard/synth.hpp"

namespace shiftguard {
namespace {

TEST(Rng, SplitMixReferenceVector) {
  // Published SplitMix64 outputs for state 1234567.
  const std::uint64_t expected[] = {6457827717110365317ULL, 3203168211198807973ULL, 9817491932198370423ULL,
                                    4593380528125082431ULL, 16408922859458223821ULL};
  std::uint64_t state = 1234567;
  for (std::uint64_t e : expected) {
    state += 0x9E3779B97F4A7C15ULL;
    EXPECT_EQ(splitmix64_mix(state), e);
  }
}

TEST(Rng, Snapshot) {
  Rng r(7, 3);
  EXPECT_EQ(r.next_u64(), 3191354218731393989ULL);
  EXPECT_EQ(r.next_u64(), 14245054144813762501ULL);
  EXPECT_EQ(r.next_u64(), 5951764663493765201ULL);
  EXPECT_EQ(r.counter(), 3u);
  EXPECT_EQ(derive_seed(42, 5), 2083660877022289409ULL);
  EXPECT_NE(derive_seed(42, 5), derive_seed(42, 6));
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(1);
  double su = 0.0;
  double sn = 0.0;
  double sn2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.015);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < 30000; ++i) ++counts[r.below(3)];
  for (auto [k, c] : counts) EXPECT_NEAR(c, 10000, 400) << k;
  EXPECT_THROW(r.below(0), InvalidArgument);
}

TEST(Generator, GaussianSnapshot) {
  const Dataset d = Generator::gaussian(2, 2024).sample(4, 0);
  const double expected[4][2] = {{1.3291766820345541, -0.62180272281160676},
                                 {-0.2016110603548262, -0.053218891273732825},
                                 {1.9351864205118328, -0.5134718047234369},
                                 {-0.56612917485082015, 0.2759829490969728}};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_EQ(d.points(i, j), expected[i][j]);
  }
  EXPECT_EQ(d.points, Generator::gaussian(2, 2024).sample(4, 0).points);
  EXPECT_NE(d.points, Generator::gaussian(2, 2024).sample(4, 1).points);
  EXPECT_NE(d.points, Generator::gaussian(2, 2025).sample(4, 0).points);
}

TEST(Generator, HypercubeCoordinates) {
  const Dataset d = Generator::hypercube(5, 3).sample(1000);
  EXPECT_EQ(d.domain, Domain::Hypercube);
  EXPECT_TRUE((d.points.array().abs() == 1.0).all());
  EXPECT_NEAR(d.points.mean(), 0.0, 0.05);
}

TEST(Generator, MeanShiftEmpiricalMean) {
  const std::size_t n = 100000;
  const Generator g = Generator::mean_shift({2.0, 0.0, 0.0}, 4);
  const Dataset d = g.sample(n);
  const Eigen::RowVectorXd mean = d.points.colwise().mean();
  EXPECT_NEAR(mean[0], 2.0, 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(mean[1], 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(mean[2], 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(g.total_variation_to_base(), 2.0 * normal_cdf(1.0) - 1.0, 1e-15);
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-15);
}

TEST(Generator, PointMassTotalVariationMatchesMonteCarlo) {
  const std::size_t n = 100000;
  const Generator base = Generator::gaussian(2, 8);
  const Generator mix = Generator::point_mass_mixture(base, {5.0, 5.0}, 0.3, 9);
  const Dataset d = mix.sample(n);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += (d.row(i)[0] == 5.0 && d.row(i)[1] == 5.0) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(hits) / n, mix.total_variation_to_base(), 0.02);
  EXPECT_DOUBLE_EQ(mix.total_variation_to_base(), 0.3);

  // Hypercube: the corner already has mass 2^-d under the base.
  const Generator cube = Generator::point_mass_mixture(Generator::hypercube(3, 1), {1, 1, 1}, 0.4, 2);
  EXPECT_DOUBLE_EQ(cube.total_variation_to_base(), 0.4 * (1.0 - 0.125));
  const Dataset c = cube.sample(n);
  const Dataset b = Generator::hypercube(3, 3).sample(n);
  // Monte-Carlo TV on the 8-point support.
  std::map<int, double> pc;
  std::map<int, double> pb;
  for (std::size_t i = 0; i < n; ++i) {
    const auto code = [](std::span<const double> x) { return (x[0] > 0) + 2 * (x[1] > 0) + 4 * (x[2] > 0); };
    pc[code(c.row(i))] += 1.0 / n;
    pb[code(b.row(i))] += 1.0 / n;
  }
  double tv = 0.0;
  for (int k = 0; k < 8; ++k) tv += 0.5 * std::abs(pc[k] - pb[k]);
  EXPECT_NEAR(tv, cube.total_variation_to_base(), 0.02);
  EXPECT_THROW(Generator::point_mass_mixture(Generator::hypercube(2, 1), {0.5, 1.0}, 0.1, 1), InvalidArgument);
}

TEST(Generator, ConditionedHalf) {
  const Generator g = Generator::conditioned_half(Generator::gaussian(3, 5), {0.0, 1.0, 0.0}, 6);
  const Dataset d = g.sample(5000);
  EXPECT_TRUE((d.points.col(1).array() > 0.0).all());
  EXPECT_DOUBLE_EQ(g.total_variation_to_base(), 0.5);
  EXPECT_THROW(Generator::conditioned_half(g, {0.0, 1.0, 0.0}, 1), InvalidArgument);
  EXPECT_THROW(Generator::gaussian(0, 1), InvalidArgument);
  EXPECT_THROW(Generator::gaussian(2, 1).sample(0), InvalidArgument);
}

TEST(Concept, TruthTables) {
  const Concept h = Concept::halfspace({1.0, 0.0}, 0.0);
  EXPECT_EQ(h(std::vector<double>{1.0, 5.0}), 1);
  EXPECT_EQ(h(std::vector<double>{-1.0, 5.0}), -1);
  EXPECT_EQ(h(std::vector<double>{0.0, 5.0}), 1);
  const Concept one = Concept::constant(1);
  const LabeledDataset all = label(Generator::gaussian(2, 1).sample(50), one);
  EXPECT_TRUE(std::all_of(all.y.begin(), all.y.end(), [](int y) { return y == 1; }));

  // Split on x2: right leaf +1, left leaf -1.
  const Concept tree(Concept::DecisionTree{{{1, 1, 2, 0}, {-1, -1, -1, -1}, {-1, -1, -1, 1}}});
  const RowMatrix cube = testing::hypercube_points(2);
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_EQ(tree(std::span<const double>(cube.row(i).data(), 2)), cube(i, 1) > 0 ? 1 : -1);
  }
  EXPECT_EQ(tree.leaf_count(), 2u);
  EXPECT_THROW(Concept(Concept::DecisionTree{{{0, 0, 1, 0}, {-1, -1, -1, 1}}}), InvalidArgument);
  EXPECT_THROW(Concept::constant(0), InvalidArgument);

  const Concept both(Concept::Intersection{{{{1.0, 0.0}, 0.0}, {{0.0, 1.0}, 0.0}}});
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_EQ(both(std::span<const double>(cube.row(i).data(), 2)), cube(i, 0) > 0 && cube(i, 1) > 0 ? 1 : -1);
  }
  const Concept flipped(Concept::Flipped{std::make_shared<const Concept>(one), {3.0, 3.0}, 1.0});
  EXPECT_EQ(flipped(std::vector<double>{3.0, 3.5}), -1);
  EXPECT_EQ(flipped(std::vector<double>{0.0, 0.0}), 1);
}

TEST(Corrupt, NoneIsIdentity) {
  const LabeledDataset data = label(Generator::gaussian(2, 1).sample(100), Concept::constant(1));
  const Corruption c = corrupt(data, Adversary::none());
  EXPECT_EQ(c.data.x.points, data.x.points);
  EXPECT_EQ(c.data.y, data.y);
  EXPECT_TRUE(c.indices.empty());
  EXPECT_EQ(std::count(c.mask.begin(), c.mask.end(), true), 0);
}

TEST(Corrupt, ReplaceExactCount) {
  const LabeledDataset data = label(Generator::gaussian(2, 1).sample(100), Concept::constant(1));
  const Corruption c = corrupt(data, Adversary::replace_fixed(0.1, {9.0, 9.0}, 3).with_labels(Adversary::ReplacementLabel::Negative));
  ASSERT_EQ(c.indices.size(), 10u);
  EXPECT_EQ(std::count(c.mask.begin(), c.mask.end(), true), 10);
  for (std::size_t i = 0; i < 100; ++i) {
    if (c.mask[i]) {
      EXPECT_EQ(c.data.x.row(i)[0], 9.0);
      EXPECT_EQ(c.data.y[i], -1);
    } else {
      EXPECT_EQ(c.data.x.points.row(static_cast<Eigen::Index>(i)), data.x.points.row(static_cast<Eigen::Index>(i)));
      EXPECT_EQ(c.data.y[i], 1);
    }
  }
  const Corruption again = corrupt(data, Adversary::replace_fixed(0.1, {9.0, 9.0}, 3));
  EXPECT_EQ(again.indices, c.indices);
  EXPECT_EQ(corrupt(data, Adversary::replace_fixed(0.155, {9.0, 9.0}, 3)).indices.size(), 15u);
}

TEST(Corrupt, LabelFlipPlantsOpt) {
  const Concept f = Concept::halfspace({1.0, 1.0}, 0.0);
  const LabeledDataset data = label(Generator::gaussian(2, 1).sample(1000), f);
  const Corruption c = corrupt(data, Adversary::label_flip(0.2, 4));
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < 1000; ++i) wrong += c.data.y[i] != f(c.data.x.row(i)) ? 1 : 0;
  EXPECT_EQ(wrong, 200u);
  EXPECT_EQ(c.data.x.points, data.x.points);
}

TEST(Corrupt, FarPointsReachFeatureNorm) {
  const double clip = 500.0;
  const Corruption c = corrupt(Generator::gaussian(3, 2).sample(50), Adversary::replace_far(0.2, 2, clip, 5));
  const MonomialBasis b(3, 2, Domain::Real);
  for (std::size_t i : c.indices) EXPECT_NEAR(b.features(c.data.x.row(i)).norm(), 100.0 * std::sqrt(clip), 1e-6);
  const Corruption corner = corrupt(Generator::hypercube(4, 2).sample(40), Adversary::replace_corner(0.25, 6));
  ASSERT_EQ(corner.indices.size(), 10u);
  for (std::size_t i : corner.indices) {
    EXPECT_EQ(corner.data.x.points.row(static_cast<Eigen::Index>(i)),
              corner.data.x.points.row(static_cast<Eigen::Index>(corner.indices[0])));
  }
  EXPECT_THROW(Adversary::label_flip(1.5, 1), InvalidArgument);
}

TEST(PlantedLambda, SharedAndFlippedConcepts) {
  const Concept f = Concept::halfspace({1.0, 0.0}, 0.0);
  const Generator gen = Generator::gaussian(2, 3);
  EXPECT_LE(planted_lambda(f, f, gen), 0.005);

  // Flip labels on a 5% point mass.
  const Generator mix = Generator::point_mass_mixture(gen, {20.0, 20.0}, 0.05, 4);
  const Concept flipped(Concept::Flipped{std::make_shared<const Concept>(f), {20.0, 20.0}, 0.5});
  EXPECT_NEAR(planted_lambda(f, flipped, mix), 0.05, 0.01);

  // Disjoint support flip at larger mass.
  const Generator heavy = Generator::point_mass_mixture(gen, {-20.0, 20.0}, 0.3, 5);
  const Concept flip2(Concept::Flipped{std::make_shared<const Concept>(f), {-20.0, 20.0}, 0.5});
  EXPECT_NEAR(planted_lambda(f, flip2, heavy), 0.3, 0.01);
}

}  // namespace
}  // namespace shiftguard
