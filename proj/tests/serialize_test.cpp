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

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shiftguard/dataset.hpp"
#include "shiftguard/errors.hpp"
#include "shiftguard/filter.hpp"
#include "shiftguard/serialize.hpp"
#include "shiftguard/synth.hpp"

namespace shiftguard {
namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("shiftguard_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + name);
}

Selector filtered_selector() {
  const Dataset ref = Generator::gaussian(2, 1).sample(3000, 0);
  const Corruption bad = corrupt(Generator::gaussian(2, 1).sample(3000, 1), Adversary::replace_fixed(0.2, {8.0, 8.0}, 2));
  FilterConfig c;
  c.clip_bound_override = 1e9;
  return run_filter(ref, bad.data.x, c).selector;
}

TEST(Container, SelectorLayout) {
  const Selector s = filtered_selector();
  ASSERT_GT(s.round_count(), 0u);
  std::ostringstream out;
  write_selector(out, s);
  const std::string bytes = out.str();
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 8), "SGCONT01");
  std::uint32_t length = 0;
  for (int i = 3; i >= 0; --i) length = (length << 8) | static_cast<unsigned char>(bytes[8 + static_cast<std::size_t>(i)]);
  const auto header = nlohmann::json::parse(bytes.substr(12, length));
  EXPECT_EQ(header.at("d"), 2);
  EXPECT_EQ(header.at("k"), 2);
  EXPECT_EQ(header.at("domain"), "real");
  EXPECT_EQ(header.at("B0"), 1e9);
  EXPECT_EQ(header.at("i_max"), s.round_count());
  std::size_t values = 0;
  for (const auto& sec : header.at("sections")) values += sec.at("count").get<std::size_t>();
  EXPECT_EQ(values, 36 + 6 * s.round_count() + s.round_count());
  EXPECT_EQ(bytes.size(), 12 + length + 8 * values);
  // moment matrix is the first section, row-major little-endian doubles
  double first = 0.0;
  std::uint64_t raw = 0;
  for (int i = 7; i >= 0; --i) raw = (raw << 8) | static_cast<unsigned char>(bytes[12 + length + static_cast<std::size_t>(i)]);
  std::memcpy(&first, &raw, 8);
  EXPECT_EQ(first, s.moments().matrix()(0, 0));
}

TEST(Container, SelectorRoundTripEvaluatesIdentically) {
  const Selector s = filtered_selector();
  std::stringstream buf;
  write_selector(buf, s);
  const Selector back = read_selector(buf);
  EXPECT_EQ(back.moments().matrix(), s.moments().matrix());
  EXPECT_EQ(back.clip_bound(), s.clip_bound());
  ASSERT_EQ(back.round_count(), s.round_count());
  const Dataset probe = Generator::gaussian(2, 9).sample(2000);
  for (std::size_t i = 0; i < probe.size(); ++i) ASSERT_EQ(back.evaluate(probe.row(i)), s.evaluate(probe.row(i)));
  const auto path = temp_path("selector.sgc");
  save_selector(path, s);
  EXPECT_EQ(load_selector(path).round_count(), s.round_count());
  std::filesystem::remove(path);
}

TEST(Container, HypothesisRoundTrip) {
  const BasisPtr b = make_basis(3, 2, Domain::Hypercube);
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(b->size()), -1.0, 1.0);
  const PolynomialHypothesis h(Polynomial(b, c), 0.125);
  std::stringstream buf;
  write_hypothesis(buf, h);
  const PolynomialHypothesis back = read_hypothesis(buf);
  EXPECT_EQ(back.threshold(), 0.125);
  EXPECT_EQ(back.polynomial().coefficients(), c);
  EXPECT_EQ(back.polynomial().basis()->domain(), Domain::Hypercube);
}

TEST(Container, LearnerOutputVariants) {
  Eigen::VectorXd w(2);
  w << 0.6, 0.8;
  LearnerOutput a{Halfspace{w, 0.5}, DisagreementSelector(w, 0.5, 0.01), Verdict::Reject, R"({"branch":"recovery"})"};
  std::stringstream buf;
  write_learner_output(buf, a);
  const LearnerOutput back = read_learner_output(buf);
  EXPECT_EQ(std::get<Halfspace>(back.h).w, w);
  EXPECT_EQ(std::get<Halfspace>(back.h).tau, 0.5);
  EXPECT_EQ(std::get<DisagreementSelector>(back.g).radius(), 0.01);
  EXPECT_EQ(back.verdict, Verdict::Reject);
  EXPECT_EQ(nlohmann::json::parse(back.diagnostics).at("branch"), "recovery");

  LearnerOutput b{ConstantHypothesis{-1}, filtered_selector(), std::nullopt, "{}"};
  const auto path = temp_path("learner.sgc");
  save_learner_output(path, b);
  const LearnerOutput bb = load_learner_output(path);
  EXPECT_EQ(std::get<ConstantHypothesis>(bb.h).value, -1);
  EXPECT_EQ(std::get<Selector>(bb.g).round_count(), std::get<Selector>(b.g).round_count());
  EXPECT_FALSE(bb.verdict.has_value());
  std::filesystem::remove(path);

  LearnerOutput bad;
  bad.diagnostics = "{not json";
  std::stringstream sink;
  EXPECT_THROW(write_learner_output(sink, bad), InvalidArgument);
}

TEST(Container, RejectsCorruptInput) {
  std::stringstream wrong("NOTACONTAINER");
  EXPECT_THROW(read_selector(wrong), FormatError);
  std::ostringstream out;
  write_selector(out, filtered_selector());
  std::stringstream truncated(out.str().substr(0, out.str().size() - 5));
  EXPECT_THROW(read_selector(truncated), FormatError);
  std::stringstream other(out.str());
  EXPECT_THROW(read_hypothesis(other), FormatError);
}

TEST(MomentJson, RoundTrip) {
  const MomentMatrix m = estimate_moments(Generator::gaussian(2, 3).sample(1000), make_basis(2, 2, Domain::Real), 0.1);
  const MomentMatrix back = moment_matrix_from_json(moment_matrix_to_json(m));
  EXPECT_EQ(back.matrix(), m.matrix());
  EXPECT_EQ(back.basis()->size(), 6u);
  EXPECT_THROW(moment_matrix_from_json("[1, 2"), FormatError);
}

TEST(DatasetFiles, CsvAndBinaryRoundTrip) {
  const LabeledDataset data = label(Generator::gaussian(3, 4).sample(25), Concept::halfspace({1.0, 0.0, 0.0}, 0.0));
  const auto csv = temp_path("data.csv");
  write_csv(csv, data);
  const LabeledDataset from_csv = read_csv(csv);
  EXPECT_EQ(from_csv.x.points, data.x.points);
  EXPECT_EQ(from_csv.y, data.y);
  {
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x1,x2,x3,y");
  }
  const auto bin = temp_path("data.sgd");
  write_binary(bin, data);
  const LabeledDataset from_bin = read_binary(bin);
  EXPECT_EQ(from_bin.x.points, data.x.points);
  EXPECT_EQ(from_bin.y, data.y);
  EXPECT_EQ(std::filesystem::file_size(bin), 8 + 4 + 4 + 8 + 8 + 25 * 4 * 8u);

  const Dataset cube = Generator::hypercube(2, 5).sample(10);
  write_binary(bin, cube);
  const LabeledDataset cube_back = read_binary(bin);
  EXPECT_EQ(cube_back.x.domain, Domain::Hypercube);
  EXPECT_TRUE(cube_back.y.empty());
  write_csv(csv, cube);
  EXPECT_EQ(read_csv(csv, Domain::Hypercube).x.points, cube.points);

  {
    std::ofstream out(csv);
    out << "x1,x3\n1,2\n";
  }
  EXPECT_THROW(read_csv(csv), FormatError);
  {
    std::ofstream out(csv);
    out << "x1,y\n1,5\n";
  }
  EXPECT_THROW(read_csv(csv), Error);
  std::filesystem::remove(csv);
  std::filesystem::remove(bin);
}

}  // namespace
}  // namespace shiftguard
