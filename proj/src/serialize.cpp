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

#include "shiftguard/serialize.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "shiftguard/errors.hpp"
#include "shiftguard/io.hpp"

namespace shiftguard {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'G', 'C', 'O', 'N', 'T', '0', '1'};

class PayloadWriter {
 public:
  void section(const std::string& name, const double* data, std::size_t count) {
    sections_.push_back({{"name", name}, {"offset", values_.size()}, {"count", count}});
    values_.insert(values_.end(), data, data + count);
  }
  void section(const std::string& name, const Eigen::VectorXd& v) {
    section(name, v.data(), static_cast<std::size_t>(v.size()));
  }

  void write(std::ostream& out, json header) const {
    header["sections"] = sections_;
    const std::string text = header.dump();
    out.write(kMagic.data(), kMagic.size());
    io::write_u32(out, static_cast<std::uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (double v : values_) io::write_f64(out, v);
    if (!out) throw FormatError("failed to write container");
  }

 private:
  json sections_ = json::array();
  std::vector<double> values_;
};

class PayloadReader {
 public:
  explicit PayloadReader(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw FormatError("not a shiftguard container");
    const std::uint32_t length = io::read_u32(in);
    std::string text(length, '\0');
    in.read(text.data(), length);
    if (!in) throw FormatError("truncated container header");
    try {
      header_ = json::parse(text);
      std::size_t total = 0;
      for (const auto& s : header_.at("sections")) {
        total = std::max(total, s.at("offset").get<std::size_t>() + s.at("count").get<std::size_t>());
      }
      values_.resize(total);
    } catch (const json::exception& e) {
      throw FormatError(std::string("bad container header: ") + e.what());
    }
    for (double& v : values_) v = io::read_f64(in);
  }

  const json& header() const { return header_; }

  std::vector<double> section(const std::string& name) const {
    for (const auto& s : header_.at("sections")) {
      if (s.at("name") == name) {
        const auto offset = s.at("offset").get<std::size_t>();
        const auto count = s.at("count").get<std::size_t>();
        return {values_.begin() + static_cast<std::ptrdiff_t>(offset),
                values_.begin() + static_cast<std::ptrdiff_t>(offset + count)};
      }
    }
    throw FormatError("container has no section " + name);
  }

  Eigen::VectorXd vector(const std::string& name) const {
    const std::vector<double> v = section(name);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

 private:
  json header_;
  std::vector<double> values_;
};

json basis_json(const MonomialBasis& basis) {
  return {{"d", basis.dim()}, {"k", basis.degree()}, {"domain", to_string(basis.domain())}, {"t", basis.size()}};
}

BasisPtr basis_from_json(const json& j) {
  BasisPtr basis = make_basis(j.at("d").get<int>(), j.at("k").get<int>(),
                              domain_from_string(j.at("domain").get<std::string>()));
  if (j.contains("t") && j.at("t").get<std::size_t>() != basis->size()) {
    throw FormatError("basis size does not match its descriptor");
  }
  return basis;
}

Eigen::MatrixXd square_from(const std::vector<double>& v, std::size_t t) {
  if (v.size() != t * t) throw FormatError("matrix section has the wrong length");
  const auto n = static_cast<Eigen::Index>(t);
  return Eigen::Map<const RowMatrix>(v.data(), n, n);
}

void put_selector(PayloadWriter& w, json& header, const std::string& prefix, const Selector& s) {
  const MomentMatrix& m = s.moments();
  header = basis_json(*m.basis());
  header["B0"] = s.clip_bound();
  header["i_max"] = s.round_count();
  header["rank_cutoff"] = m.rank_cutoff();
  header["used_fallback"] = m.used_fallback();
  const RowMatrix rows = m.matrix();
  w.section(prefix + "moment_matrix", rows.data(), static_cast<std::size_t>(rows.size()));
  Eigen::VectorXd thresholds(static_cast<Eigen::Index>(s.round_count()));
  for (std::size_t i = 0; i < s.round_count(); ++i) {
    w.section(prefix + "round." + std::to_string(i), s.rounds()[i].polynomial.coefficients());
    thresholds[static_cast<Eigen::Index>(i)] = s.rounds()[i].threshold;
  }
  w.section(prefix + "thresholds", thresholds);
}

Selector get_selector(const PayloadReader& r, const json& header, const std::string& prefix) {
  try {
    BasisPtr basis = basis_from_json(header);
    MomentMatrix m(basis, square_from(r.section(prefix + "moment_matrix"), basis->size()),
                   header.at("rank_cutoff").get<double>());
    m.set_used_fallback(header.value("used_fallback", false));
    const auto count = header.at("i_max").get<std::size_t>();
    const Eigen::VectorXd thresholds = r.vector(prefix + "thresholds");
    if (static_cast<std::size_t>(thresholds.size()) != count) throw FormatError("threshold count differs from i_max");
    std::vector<FilterRound> rounds;
    for (std::size_t i = 0; i < count; ++i) {
      Eigen::VectorXd coef = r.vector(prefix + "round." + std::to_string(i));
      if (static_cast<std::size_t>(coef.size()) != basis->size()) throw FormatError("round polynomial has wrong size");
      rounds.push_back({Polynomial(basis, std::move(coef)), thresholds[static_cast<Eigen::Index>(i)]});
    }
    return Selector(std::move(m), header.at("B0").get<double>(), std::move(rounds));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad selector header: ") + e.what());
  }
}

void put_polynomial_hypothesis(PayloadWriter& w, json& header, const std::string& prefix,
                               const PolynomialHypothesis& h) {
  header = basis_json(*h.polynomial().basis());
  header["threshold"] = h.threshold();
  w.section(prefix + "coefficients", h.polynomial().coefficients());
}

PolynomialHypothesis get_polynomial_hypothesis(const PayloadReader& r, const json& header, const std::string& prefix) {
  try {
    BasisPtr basis = basis_from_json(header);
    Eigen::VectorXd coef = r.vector(prefix + "coefficients");
    if (static_cast<std::size_t>(coef.size()) != basis->size()) throw FormatError("coefficient count differs from t");
    return PolynomialHypothesis(Polynomial(basis, std::move(coef)), header.at("threshold").get<double>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad hypothesis header: ") + e.what());
  }
}

}  // namespace

void write_selector(std::ostream& out, const Selector& selector) {
  PayloadWriter w;
  json header;
  put_selector(w, header, "", selector);
  header["kind"] = "selector";
  w.write(out, std::move(header));
}

Selector read_selector(std::istream& in) {
  PayloadReader r(in);
  if (r.header().value("kind", "") != "selector") throw FormatError("container does not hold a selector");
  return get_selector(r, r.header(), "");
}

void write_hypothesis(std::ostream& out, const PolynomialHypothesis& hypothesis) {
  PayloadWriter w;
  json header;
  put_polynomial_hypothesis(w, header, "", hypothesis);
  header["kind"] = "hypothesis";
  w.write(out, std::move(header));
}

PolynomialHypothesis read_hypothesis(std::istream& in) {
  PayloadReader r(in);
  if (r.header().value("kind", "") != "hypothesis") throw FormatError("container does not hold a hypothesis");
  return get_polynomial_hypothesis(r, r.header(), "");
}

void write_learner_output(std::ostream& out, const LearnerOutput& output) {
  PayloadWriter w;
  json h;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PolynomialHypothesis>) {
          put_polynomial_hypothesis(w, h, "h.", v);
          h["type"] = "polynomial";
        } else if constexpr (std::is_same_v<T, Halfspace>) {
          h = {{"type", "halfspace"}, {"tau", v.tau}};
          w.section("h.w", v.w);
        } else {
          h = {{"type", "constant"}, {"value", v.value}};
        }
      },
      output.h);
  json g;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Selector>) {
          put_selector(w, g, "g.", v);
          g["type"] = "filter";
        } else if constexpr (std::is_same_v<T, DisagreementSelector>) {
          g = {{"type", "disagreement"}, {"tau", v.tau()}, {"radius", v.radius()}};
          w.section("g.w", v.w());
        } else {
          g = {{"type", "accept_all"}};
        }
      },
      output.g);
  json header = {{"kind", "learner_output"}, {"h", h}, {"g", g}};
  header["verdict"] = output.verdict ? json(to_string(*output.verdict)) : json(nullptr);
  try {
    header["diagnostics"] = json::parse(output.diagnostics);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("diagnostics are not valid JSON: ") + e.what());
  }
  w.write(out, std::move(header));
}

LearnerOutput read_learner_output(std::istream& in) {
  PayloadReader r(in);
  const json& header = r.header();
  if (header.value("kind", "") != "learner_output") throw FormatError("container does not hold a learner output");
  LearnerOutput out;
  try {
    const json& h = header.at("h");
    const std::string ht = h.at("type");
    if (ht == "polynomial") {
      out.h = get_polynomial_hypothesis(r, h, "h.");
    } else if (ht == "halfspace") {
      out.h = Halfspace{r.vector("h.w"), h.at("tau").get<double>()};
    } else if (ht == "constant") {
      out.h = ConstantHypothesis{h.at("value").get<int>()};
    } else {
      throw FormatError("unknown hypothesis type " + ht);
    }
    const json& g = header.at("g");
    const std::string gt = g.at("type");
    if (gt == "filter") {
      out.g = get_selector(r, g, "g.");
    } else if (gt == "disagreement") {
      out.g = DisagreementSelector(r.vector("g.w"), g.at("tau").get<double>(), g.at("radius").get<double>());
    } else if (gt == "accept_all") {
      out.g = AcceptAll{};
    } else {
      throw FormatError("unknown selector type " + gt);
    }
    const json& verdict = header.at("verdict");
    if (!verdict.is_null()) out.verdict = verdict.get<std::string>() == "accept" ? Verdict::Accept : Verdict::Reject;
    out.diagnostics = header.at("diagnostics").dump();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad learner output header: ") + e.what());
  }
  return out;
}

namespace {

template <typename F>
void with_output_file(const std::filesystem::path& path, F&& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  f(out);
}

template <typename F>
auto with_input_file(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return f(in);
}

}  // namespace

void save_selector(const std::filesystem::path& path, const Selector& selector) {
  with_output_file(path, [&](std::ostream& out) { write_selector(out, selector); });
}

Selector load_selector(const std::filesystem::path& path) {
  return with_input_file(path, [](std::istream& in) { return read_selector(in); });
}

void save_learner_output(const std::filesystem::path& path, const LearnerOutput& output) {
  with_output_file(path, [&](std::ostream& out) { write_learner_output(out, output); });
}

LearnerOutput load_learner_output(const std::filesystem::path& path) {
  return with_input_file(path, [](std::istream& in) { return read_learner_output(in); });
}

std::string moment_matrix_to_json(const MomentMatrix& moments) {
  json j = basis_json(*moments.basis());
  j["rank_cutoff"] = moments.rank_cutoff();
  j["used_fallback"] = moments.used_fallback();
  const RowMatrix rows = moments.matrix();
  j["matrix"] = std::vector<double>(rows.data(), rows.data() + rows.size());
  return j.dump();
}

MomentMatrix moment_matrix_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    BasisPtr basis = basis_from_json(j);
    MomentMatrix m(basis, square_from(j.at("matrix").get<std::vector<double>>(), basis->size()),
                   j.at("rank_cutoff").get<double>());
    m.set_used_fallback(j.value("used_fallback", false));
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad moment matrix JSON: ") + e.what());
  }
}

}  // namespace shiftguard
