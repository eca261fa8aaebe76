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

#include "rectmatch/error.hpp"

namespace rectmatch {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveDeterminant: return "NonPositiveDeterminant";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kEmptyShapeSet: return "EmptyShapeSet";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonPositiveDetShape: return "NonPositiveDetShape";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kLabelMismatch: return "LabelMismatch";
    case ErrorCode::kTooManyClusters: return "TooManyClusters";
    case ErrorCode::kNormalFacesAway: return "NormalFacesAway";
    case ErrorCode::kSingularMap: return "SingularMap";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kOversizeWarp: return "OversizeWarp";
    case ErrorCode::kInsufficientMatches: return "InsufficientMatches";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNotARotation: return "NotARotation";
    case ErrorCode::kEmptyVisibleRegion: return "EmptyVisibleRegion";
    case ErrorCode::kMissingAuxInput: return "MissingAuxInput";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kManifestError: return "ManifestError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kStageFailure: return "StageFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      message_(message) {}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace rectmatch
