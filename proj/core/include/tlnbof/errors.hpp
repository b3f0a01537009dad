// Copyright 2026 The tlnbof Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tlnbof {

// Bad argument or shape at an API boundary.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced (or would produce) a non-finite value.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An object was used outside its valid lifecycle, e.g. a stale forward context.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A metric is mathematically undefined for the supplied confusion matrix.
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed file. `position` is a byte offset for binary files and a 1-based
// line number for text files; `kind` says which.
class FormatError : public std::runtime_error {
 public:
  enum class Position { kByteOffset, kLine };

  FormatError(const std::string& what, Position kind, std::size_t position)
      : std::runtime_error(what + (kind == Position::kByteOffset ? " (at byte " : " (at line ") +
                           std::to_string(position) + ")"),
        kind_(kind),
        position_(position) {}

  Position kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Position kind_;
  std::size_t position_;
};

}  // namespace tlnbof
