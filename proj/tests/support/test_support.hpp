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

// Shared oracles and scene builders for the unit and acceptance tests. The
// oracles deliberately avoid the library's own numerical paths.

#ifndef RECTMATCH_TESTS_TEST_SUPPORT_HPP_
#define RECTMATCH_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "rectmatch/camera.hpp"
#include "rectmatch/geometry.hpp"
#include "rectmatch/image.hpp"

namespace rectmatch::testing {

// Uniformly distributed rotation (Shoemake).
Eigen::Matrix3d RandomRotation(std::mt19937_64& rng);
Eigen::Matrix3d AxisAngle(const Eigen::Vector3d& axis, double degrees);

// Relative rotation angle through unit quaternions.
double QuaternionAngleDeg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

// sigma_max / sigma_min of diag(t_b, 1) R(phi_b - phi_a) diag(1 / t_a, 1)
// through a general SVD.
double TransitionTiltSvd(const TiltPoint& a, const TiltPoint& b);

TiltPoint RandomTiltPoint(std::mt19937_64& rng, double max_log_tilt);

// Smallest number of candidate balls (origin plus the points) reaching
// `min_ratio` of the points, by exhaustive subset search; nullopt when even
// all candidates together fall short.
std::optional<int> ExhaustiveMinimumCover(const std::vector<TiltPoint>& points, double radius,
                                          double min_ratio);

struct PoseScene {
  CameraIntrinsics k;
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;  // unit
  std::vector<Eigen::Vector2d> pts_a;
  std::vector<Eigen::Vector2d> pts_b;
  std::vector<bool> inlier;
};

// Random two-view scene of points in front of both 640x480 cameras, with
// Gaussian pixel noise on inliers and uniform outliers in image b.
PoseScene MakePoseScene(std::uint64_t seed, int count, double noise_px, double outlier_fraction);

// Dense per-pixel reference for the homography MAE.
double DenseMae(const Eigen::Matrix3d& h_est, const Eigen::Matrix3d& h_gt, int wa, int ha, int wb,
                int hb);

// Band-limited random texture in [0, 1].
Image TextureImage(int width, int height, std::uint64_t seed);

}  // namespace rectmatch::testing

#endif  // RECTMATCH_TESTS_TEST_SUPPORT_HPP_
