// Copyright 2026 The tlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TLAB_ERRORS_HPP_
#define TLAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tlab {

// Shape or axis-length mismatch.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Value outside its mathematical domain (bad token id, negative lambda, ...).
struct DomainError : std::invalid_argument {
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Non-finite input where finite values are required.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed binary payload (bad magic, truncation); carries the byte offset.
struct FormatError : std::runtime_error {
  FormatError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  std::size_t byte_offset;
};

// File version field does not match what this build reads.
struct VersionError : std::runtime_error {
  explicit VersionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed text record; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg, long line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_number(line) {}
  long line_number;
};

// Well-formed record violating a semantic invariant (e.g. end_s <= start_s).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg, long line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_number(line) {}
  long line_number;
};

struct RangeError : std::out_of_range {
  explicit RangeError(const std::string& msg) : std::out_of_range(msg) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tlab

#endif  // TLAB_ERRORS_HPP_
