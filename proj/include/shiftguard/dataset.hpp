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
#include <filesystem>
#include <span>
#include <vector>

#include "shiftguard/basis.hpp"

namespace shiftguard {

/// Points in R^d (or {-1,+1}^d), one per row.
struct Dataset {
  RowMatrix points;
  Domain domain = Domain::Real;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  bool empty() const { return points.rows() == 0; }
  std::span<const double> row(std::size_t i) const {
    return {points.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(points.cols())};
  }

  /// Rows at the given indices, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Rows [begin, end).
  Dataset slice(std::size_t begin, std::size_t end) const;
};

/// Dataset with +-1 labels.
struct LabeledDataset {
  Dataset x;
  std::vector<int> y;

  std::size_t size() const { return x.size(); }
  int dim() const { return x.dim(); }
  LabeledDataset subset(std::span<const std::size_t> indices) const;
  LabeledDataset slice(std::size_t begin, std::size_t end) const;
};

/// Throws if any coordinate is non-finite, or not +-1 on the hypercube.
void validate_domain(const Dataset& data);
/// Throws if the label count differs from the point count or a label is not +-1.
void validate_labels(const LabeledDataset& data);

// CSV files carry a header `x1,...,xd[,y]`. The binary layout is the magic
// "SGDATA01", then little-endian u32 domain (0 real, 1 hypercube), u32 has
// labels, u64 d, u64 N, followed by N rows of d (+1 when labelled) f64.
void write_csv(const std::filesystem::path& path, const Dataset& data);
void write_csv(const std::filesystem::path& path, const LabeledDataset& data);
/// Reads a CSV; labels are returned iff the last header column is `y`.
LabeledDataset read_csv(const std::filesystem::path& path, Domain domain = Domain::Real);

void write_binary(const std::filesystem::path& path, const Dataset& data);
void write_binary(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset read_binary(const std::filesystem::path& path);

}  // namespace shiftguard
