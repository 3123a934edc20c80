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

#include "shiftguard/dataset.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "shiftguard/errors.hpp"
#include "shiftguard/io.hpp"

namespace shiftguard {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.domain = domain;
  out.points.resize(static_cast<Eigen::Index>(indices.size()), points.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.points.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(indices[i]));
  }
  return out;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw InvalidArgument("dataset slice out of range");
  Dataset out;
  out.domain = domain;
  out.points = points.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
  return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out{x.subset(indices), {}};
  out.y.reserve(indices.size());
  for (std::size_t i : indices) out.y.push_back(y[i]);
  return out;
}

LabeledDataset LabeledDataset::slice(std::size_t begin, std::size_t end) const {
  LabeledDataset out{x.slice(begin, end), {}};
  out.y.assign(y.begin() + static_cast<std::ptrdiff_t>(begin), y.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

void validate_domain(const Dataset& data) {
  for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
      const double v = data.points(i, j);
      if (!std::isfinite(v)) throw InvalidArgument("dataset contains a non-finite coordinate");
      if (data.domain == Domain::Hypercube && v != 1.0 && v != -1.0) {
        throw InvalidArgument("hypercube dataset contains a coordinate other than +-1");
      }
    }
  }
}

void validate_labels(const LabeledDataset& data) {
  if (data.y.size() != data.x.size()) throw DimensionError("label count differs from point count");
  for (int label : data.y) {
    if (label != 1 && label != -1) throw InvalidArgument("labels must be +1 or -1");
  }
}

namespace {

constexpr std::array<char, 8> kDataMagic = {'S', 'G', 'D', 'A', 'T', 'A', '0', '1'};

void write_rows_csv(std::ostream& out, const Dataset& data, const std::vector<int>* labels) {
  for (int j = 0; j < data.dim(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
  if (labels) out << ",y";
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    if (labels) out << ',' << (*labels)[i];
    out << '\n';
  }
}

void write_binary_impl(const std::filesystem::path& path, const Dataset& data, const std::vector<int>* labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(kDataMagic.data(), kDataMagic.size());
  io::write_u32(out, data.domain == Domain::Hypercube ? 1u : 0u);
  io::write_u32(out, labels ? 1u : 0u);
  io::write_u64(out, static_cast<std::uint64_t>(data.dim()));
  io::write_u64(out, data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) io::write_f64(out, v);
    if (labels) io::write_f64(out, static_cast<double>((*labels)[i]));
  }
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_rows_csv(out, data, nullptr);
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_rows_csv(out, data.x, &data.y);
}

LabeledDataset read_csv(const std::filesystem::path& path, Domain domain) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing CSV header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool labelled = !header.empty() && header.back() == "y";
  const std::size_t dim = header.size() - (labelled ? 1 : 0);
  if (dim == 0) throw FormatError("CSV header has no feature columns");
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) throw FormatError("unexpected CSV column '" + header[j] + "'");
  }
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError("bad CSV value '" + cell + "' on data row " + std::to_string(rows + 1));
      }
      if (col < dim) values.push_back(v);
      else labels.push_back(static_cast<int>(v));
      ++col;
    }
    if (col != header.size()) throw FormatError("CSV row " + std::to_string(rows + 1) + " has wrong width");
    ++rows;
  }
  LabeledDataset out;
  out.x.domain = domain;
  out.x.points = Eigen::Map<RowMatrix>(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  out.y = std::move(labels);
  validate_domain(out.x);
  if (labelled) validate_labels(out);
  return out;
}

void write_binary(const std::filesystem::path& path, const Dataset& data) { write_binary_impl(path, data, nullptr); }

void write_binary(const std::filesystem::path& path, const LabeledDataset& data) {
  write_binary_impl(path, data.x, &data.y);
}

LabeledDataset read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kDataMagic) throw FormatError("not a dataset file: bad magic");
  const std::uint32_t domain = io::read_u32(in);
  const std::uint32_t labelled = io::read_u32(in);
  const std::uint64_t dim = io::read_u64(in);
  const std::uint64_t rows = io::read_u64(in);
  if (domain > 1 || labelled > 1 || dim == 0) throw FormatError("corrupt dataset header");
  LabeledDataset out;
  out.x.domain = domain == 1 ? Domain::Hypercube : Domain::Real;
  out.x.points.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (std::uint64_t j = 0; j < dim; ++j) {
      out.x.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = io::read_f64(in);
    }
    if (labelled) out.y.push_back(static_cast<int>(io::read_f64(in)));
  }
  return out;
}

}  // namespace shiftguard
