// Copyright 2026 The rectmatch Authors.
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

#ifndef RECTMATCH_ERROR_HPP_
#define RECTMATCH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rectmatch {

enum class ErrorCode {
  kNonPositiveDeterminant,
  kDegenerate,
  kInvalidParameter,
  kEmptyShapeSet,
  kFormatError,
  kDimensionMismatch,
  kNonPositiveDetShape,
  kImageTooSmall,
  kLabelMismatch,
  kTooManyClusters,
  kNormalFacesAway,
  kSingularMap,
  kEmptyMask,
  kOversizeWarp,
  kInsufficientMatches,
  kDegenerateConfiguration,
  kNotARotation,
  kEmptyVisibleRegion,
  kMissingAuxInput,
  kInvalidSpec,
  kManifestError,
  kIoError,
  kStageFailure,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets callers (and tests) dispatch on the failure kind without parsing the
// message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // The message without the code-name prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace rectmatch

#endif  // RECTMATCH_ERROR_HPP_
