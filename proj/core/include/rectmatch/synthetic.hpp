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

#ifndef RECTMATCH_SYNTHETIC_HPP_
#define RECTMATCH_SYNTHETIC_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "rectmatch/camera.hpp"
#include "rectmatch/image.hpp"
#include "rectmatch/shape_field.hpp"

namespace rectmatch {

enum class SceneType { kSinglePlane, kTwoPlanes, kCubeCorner };

std::string SceneTypeName(SceneType scene);
SceneType ParseSceneType(const std::string& name);  // kInvalidSpec when unknown

struct SyntheticSpec {
  SceneType scene = SceneType::kSinglePlane;
  std::uint64_t texture_seed = 0;
  int width = 256;
  int height = 256;
  double focal_px = 800.0;
  // single_plane: tilt of the plane in view b (1 = identical cameras). The
  // second camera orbits the plane centre by arccos(1 / tilt).
  double tilt = 1.0;
  // Extra in-plane rotation of camera b about its optical axis, degrees.
  double roll_deg = 0.0;
  // two_planes / cube_corner: orbit of camera b about the scene centre.
  double yaw_deg = 20.0;
  double pitch_deg = 0.0;
  int shape_cell_size = 4;
  int texture_size = 2048;

  bool operator==(const SyntheticSpec&) const = default;
};

SyntheticSpec SyntheticSpecFromJson(const nlohmann::json& j);
nlohmann::json SyntheticSpecToJson(const SyntheticSpec& spec);

struct SyntheticView {
  Image image;
  DepthMap depth;          // camera z, 0 where nothing was hit
  // True rectifying shapes (pixel -> texel Jacobian, unit determinant).
  DenseShapeField shapes = DenseShapeField::Identity(1, 1, 1);
  std::vector<int> plane_labels;  // per pixel, -1 when nothing was hit
};

// Textured plane n . X = offset in the frame of camera a; n faces camera a.
struct SyntheticPlane {
  Eigen::Vector3d normal;
  double offset = 0.0;
  Eigen::Vector3d origin;  // texture origin on the plane
  Eigen::Vector3d axis_u;  // orthonormal in-plane texture axes
  Eigen::Vector3d axis_v;
  double texels_per_unit = 1.0;
  Eigen::Vector2d texel_offset = Eigen::Vector2d::Zero();
};

struct SyntheticPair {
  SyntheticSpec spec;
  CameraIntrinsics intrinsics;  // shared by both views
  SyntheticView a;
  SyntheticView b;
  // X_b = rotation * X_a + translation.
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  // Plane-induced homography a -> b (single_plane only).
  std::optional<Eigen::Matrix3d> homography;
  std::vector<SyntheticPlane> planes;
  // Pose of camera b: X_b = camera_b_rotation * (X - camera_b_center).
  Eigen::Matrix3d camera_b_rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d camera_b_center = Eigen::Vector3d::Zero();
};

// Deterministic two-view rendering of textured planes.
SyntheticPair GenerateSyntheticPair(const SyntheticSpec& spec);

// Projection of a pixel of view a to view b through the rendered geometry,
// or nullopt when the pixel sees nothing.
std::optional<Eigen::Vector2d> TransferPixel(const SyntheticPair& pair, const Eigen::Vector2d& pa);

// Multi-scale procedural texture with values in [0, 1], periodic.
Image ProceduralTexture(int size, std::uint64_t seed);

}  // namespace rectmatch

#endif  // RECTMATCH_SYNTHETIC_HPP_
