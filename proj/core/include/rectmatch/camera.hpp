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

#ifndef RECTMATCH_CAMERA_HPP_
#define RECTMATCH_CAMERA_HPP_

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace rectmatch {

// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d K() const;
  Eigen::Matrix3d KInverse() const;
  void Validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

nlohmann::json IntrinsicsToJson(const CameraIntrinsics& k);
// Accepts {"fx","fy","cx","cy"} or a 3x3 nested array.
CameraIntrinsics IntrinsicsFromJson(const nlohmann::json& j);

}  // namespace rectmatch

#endif  // RECTMATCH_CAMERA_HPP_
