// fssr/common/error.h
//
// Copyright 2026  FSSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FSSR_COMMON_ERROR_H_
#define FSSR_COMMON_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace fssr {

// Error codes. The public C header (include/fssr.h) mirrors these values;
// keep the two lists in sync.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIo = 2,
  kUnreadableFile = 3,
  kEmptyAudio = 4,
  kClipTooShort = 5,
  kAlreadyNormalized = 6,
  kMissingRoot = 7,
  kInsufficientData = 8,
  kPoolTooSmall = 9,
  kEmptyClass = 10,
  kShapeMismatch = 11,
  kDimensionMismatch = 12,
  kNonFiniteActivation = 13,
  kConfigMismatch = 14,
  kDivergenceDetected = 15,
  kCheckpointIncompatible = 16,
  kEmptyInput = 17,
  kInternal = 18,
};

const char *ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

namespace internal {
struct ErrorBuilder {
  ErrorCode code;
  std::ostringstream os;
  explicit ErrorBuilder(ErrorCode c) : code(c) {}
  template <typename T>
  ErrorBuilder &operator<<(const T &v) {
    os << v;
    return *this;
  }
};
struct Thrower {
  [[noreturn]] void operator&(ErrorBuilder &b) const {
    throw Error(b.code, b.os.str());
  }
};
}  // namespace internal

// Usage: FSSR_RAISE(ErrorCode::kClipTooShort) << "clip has " << n << " samples";
#define FSSR_RAISE(code)                                      \
  ::fssr::internal::Thrower() &                               \
      ::fssr::internal::ErrorBuilder(code) << ""

#define FSSR_CHECK(cond, code)          \
  if (cond) {                           \
  } else /* NOLINT */                   \
    FSSR_RAISE(code) << "check failed: " #cond ": "

}  // namespace fssr

#endif  // FSSR_COMMON_ERROR_H_
