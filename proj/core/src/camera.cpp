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

#include "rectmatch/camera.hpp"

#include <cmath>

#include "rectmatch/error.hpp"

namespace rectmatch {

Eigen::Matrix3d CameraIntrinsics::K() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraIntrinsics::KInverse() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    Fail(ErrorCode::kInvalidParameter, "intrinsics need finite fx, fy > 0");
  }
}

nlohmann::json IntrinsicsToJson(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

CameraIntrinsics IntrinsicsFromJson(const nlohmann::json& j) {
  CameraIntrinsics k;
  if (j.is_array()) {
    if (j.size() != 3 || j[0].size() != 3) {
      Fail(ErrorCode::kFormatError, "intrinsics matrix must be 3x3");
    }
    k.fx = j[0][0].get<double>();
    k.cx = j[0][2].get<double>();
    k.fy = j[1][1].get<double>();
    k.cy = j[1][2].get<double>();
  } else if (j.is_object()) {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
  } else {
    Fail(ErrorCode::kFormatError, "intrinsics must be an object or a 3x3 array");
  }
  k.Validate();
  return k;
}

}  // namespace rectmatch
