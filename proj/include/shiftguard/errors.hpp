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

#include <stdexcept>
#include <string>

namespace shiftguard {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point, matrix or coefficient vector does not match the expected shape.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied parameter violates its documented range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The input data admits no meaningful answer (e.g. a zero label correlation).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Fewer samples than the requested operation needs.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or serialized blob.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace shiftguard
