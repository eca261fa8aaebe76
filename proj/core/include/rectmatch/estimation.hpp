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

#ifndef RECTMATCH_ESTIMATION_HPP_
#define RECTMATCH_ESTIMATION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rectmatch/camera.hpp"

namespace rectmatch {

struct RansacConfig {
  double threshold_px = 0.5;
  double confidence = 1.0 - 1e-4;
  int max_iterations = 100000;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const RansacConfig&) const = default;
};

// Relative pose of camera b with respect to camera a: X_b = R X_a + t.
struct PoseEstimate {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_dir = Eigen::Vector3d::UnitZ();
  Eigen::Matrix3d essential = Eigen::Matrix3d::Zero();
  std::vector<std::uint8_t> inlier_mask;
  int inlier_count = 0;
  int iterations = 0;
};

struct HomographyEstimate {
  Eigen::Matrix3d homography = Eigen::Matrix3d::Identity();  // maps a -> b
  std::vector<std::uint8_t> inlier_mask;
  int inlier_count = 0;
  int iterations = 0;
};

// Both estimators take corresponding pixel positions pts_a[i] <-> pts_b[i].
PoseEstimate EstimateEssential(std::span<const Eigen::Vector2d> pts_a,
                               std::span<const Eigen::Vector2d> pts_b,
                               const CameraIntrinsics& k_a, const CameraIntrinsics& k_b,
                               const RansacConfig& config);

HomographyEstimate EstimateHomography(std::span<const Eigen::Vector2d> pts_a,
                                      std::span<const Eigen::Vector2d> pts_b,
                                      const RansacConfig& config);

// Linear solvers (no RANSAC). Inputs must already be K-normalised for the
// essential solver. Return nullopt on a degenerate system.
std::optional<Eigen::Matrix3d> SolveEssentialLinear(std::span<const Eigen::Vector2d> xa,
                                                    std::span<const Eigen::Vector2d> xb);
std::optional<Eigen::Matrix3d> SolveHomographyLinear(std::span<const Eigen::Vector2d> pa,
                                                     std::span<const Eigen::Vector2d> pb);

// Closest essential matrix: singular values (s, s, 0), s = mean of the top two.
Eigen::Matrix3d ProjectToEssential(const Eigen::Matrix3d& e);

// Four-fold decomposition with cheirality voting over normalised points.
void DecomposeEssential(const Eigen::Matrix3d& e, std::span<const Eigen::Vector2d> xa,
                        std::span<const Eigen::Vector2d> xb, Eigen::Matrix3d* rotation,
                        Eigen::Vector3d* translation);

// RMS of the two point-to-epipolar-line distances, in pixels.
double EpipolarErrorPx(const Eigen::Matrix3d& fundamental, const Eigen::Vector2d& pa,
                       const Eigen::Vector2d& pb);
Eigen::Matrix3d FundamentalFromEssential(const Eigen::Matrix3d& e, const CameraIntrinsics& k_a,
                                         const CameraIntrinsics& k_b);

// RMS of the forward and backward transfer distances, in pixels.
double SymmetricTransferError(const Eigen::Matrix3d& h, const Eigen::Matrix3d& h_inverse,
                              const Eigen::Vector2d& pa, const Eigen::Vector2d& pb);

int AdaptiveIterationCount(double inlier_ratio, int sample_size, double confidence,
                           int max_iterations);

// Angle of R_est * R_gt^T in degrees.
double RotationErrorDeg(const Eigen::Matrix3d& r_est, const Eigen::Matrix3d& r_gt);

// Mean distance between H_est(p) and H_gt(p) over pixels p of image a
// (width_a x height_a) whose H_gt image falls inside image b.
double MaeReprojection(const Eigen::Matrix3d& h_est, const Eigen::Matrix3d& h_gt, int width_a,
                       int height_a, int width_b, int height_b);

}  // namespace rectmatch

#endif  // RECTMATCH_ESTIMATION_HPP_
