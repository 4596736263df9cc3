// Copyright 2026 The vadfuse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VADFUSE_COMMON_H_
#define VADFUSE_COMMON_H_

#include <stdexcept>
#include <string>

namespace vadfuse {

// Floor added inside every logarithm so that digital silence stays finite.
inline constexpr double kLogFloor = 1e-10;

// Error classes. The CLI maps them onto exit codes (see commands.h).
enum class ErrorKind {
  kUsage,
  kIo,
  kFormat,
  kData,
  kNumeric,
};

// Finer-grained condition so callers can substitute per-frame fallbacks.
enum class ErrorCode {
  kGeneric,
  kUnsupportedFormat,
  kMalformedHeader,
  kDegenerateInput,
  kDegenerateFrame,
  kUnstableFrame,
  kDegenerateLabels,
  kDimensionMismatch,
  kLengthMismatch,
  kDivergence,
  kChecksum,
  kVersion,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, ErrorCode code, const std::string &what)
      : std::runtime_error(what), kind_(kind), code_(code) {}
  Error(ErrorKind kind, const std::string &what)
      : Error(kind, ErrorCode::kGeneric, what) {}

  ErrorKind kind() const { return kind_; }
  ErrorCode code() const { return code_; }

 private:
  ErrorKind kind_;
  ErrorCode code_;
};

}  // namespace vadfuse

#endif  // VADFUSE_COMMON_H_
