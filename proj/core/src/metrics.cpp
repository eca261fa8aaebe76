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

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "rectmatch/error.hpp"
#include "rectmatch/estimation.hpp"

namespace rectmatch {
namespace {

void RequireRotation(const Eigen::Matrix3d& r, const char* name) {
  if (!r.allFinite() || (r.transpose() * r - Eigen::Matrix3d::Identity()).norm() > 1e-6 ||
      r.determinant() <= 0.0) {
    Fail(ErrorCode::kNotARotation, std::string(name) + " is not a rotation matrix");
  }
}

}  // namespace

double RotationErrorDeg(const Eigen::Matrix3d& r_est, const Eigen::Matrix3d& r_gt) {
  RequireRotation(r_est, "estimated rotation");
  RequireRotation(r_gt, "ground-truth rotation");
  // |A - B|_F^2 = 8 sin^2(theta / 2) and |A + B|_F^2 = 4 + 8 cos^2(theta / 2),
  // so identical inputs give exactly 0 and small angles keep full precision.
  const double s = (r_est - r_gt).norm();
  const double c = std::sqrt(std::max(0.0, (r_est + r_gt).squaredNorm() - 4.0));
  const double angle = 2.0 * std::atan2(s, c);
  return std::clamp(angle * 180.0 / std::numbers::pi, 0.0, 180.0);
}

double MaeReprojection(const Eigen::Matrix3d& h_est, const Eigen::Matrix3d& h_gt, int width_a,
                       int height_a, int width_b, int height_b) {
  for (const Eigen::Matrix3d* h : {&h_est, &h_gt}) {
    if (!h->allFinite() || std::abs(h->determinant()) < 1e-300) {
      Fail(ErrorCode::kSingularMap, "homography is not invertible");
    }
  }
  // Homographies are defined up to scale; a negative scale flips w.
  const double w_sign = h_gt(2, 2) < 0.0 ? -1.0 : 1.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < height_a; ++y) {
    for (int x = 0; x < width_a; ++x) {
      const Eigen::Vector3d g = h_gt * Eigen::Vector3d(x, y, 1.0);
      if (!(w_sign * g.z() > 0.0)) continue;
      const Eigen::Vector2d pg = g.head<2>() / g.z();
      if (pg.x() < 0.0 || pg.y() < 0.0 || pg.x() > width_b - 1 || pg.y() > height_b - 1) continue;
      const Eigen::Vector3d e = h_est * Eigen::Vector3d(x, y, 1.0);
      sum += (e.head<2>() / e.z() - pg).norm();
      ++count;
    }
  }
  if (count == 0) Fail(ErrorCode::kEmptyVisibleRegion, "no pixel of image a is visible in image b");
  return sum / static_cast<double>(count);
}

}  // namespace rectmatch
