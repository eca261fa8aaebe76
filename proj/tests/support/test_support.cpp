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

#include "test_support.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "rectmatch/synthetic.hpp"

namespace rectmatch::testing {

Eigen::Matrix3d RandomRotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng);
  const double u2 = u(rng) * 2.0 * std::numbers::pi;
  const double u3 = u(rng) * 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const Eigen::Quaterniond q(a * std::sin(u2), a * std::cos(u2), b * std::sin(u3),
                             b * std::cos(u3));
  return q.normalized().toRotationMatrix();
}

Eigen::Matrix3d AxisAngle(const Eigen::Vector3d& axis, double degrees) {
  return Eigen::AngleAxisd(degrees * std::numbers::pi / 180.0, axis.normalized())
      .toRotationMatrix();
}

double QuaternionAngleDeg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Quaterniond qa(a);
  const Eigen::Quaterniond qb(b);
  const Eigen::Quaterniond d = qa * qb.conjugate();
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w())) * 180.0 / std::numbers::pi;
}

double TransitionTiltSvd(const TiltPoint& a, const TiltPoint& b) {
  const double d = b.phi() - a.phi();
  Eigen::Matrix2d r;
  r << std::cos(d), -std::sin(d), std::sin(d), std::cos(d);
  const Eigen::Matrix2d m = Eigen::Vector2d(b.tilt(), 1.0).asDiagonal() * r *
                            Eigen::Vector2d(1.0 / a.tilt(), 1.0).asDiagonal();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  return svd.singularValues()(0) / svd.singularValues()(1);
}

TiltPoint RandomTiltPoint(std::mt19937_64& rng, double max_log_tilt) {
  std::uniform_real_distribution<double> lt(0.0, max_log_tilt);
  std::uniform_real_distribution<double> ph(0.0, std::numbers::pi);
  return TiltPoint(lt(rng), ph(rng));
}

std::optional<int> ExhaustiveMinimumCover(const std::vector<TiltPoint>& points, double radius,
                                          double min_ratio) {
  std::vector<TiltPoint> candidates{TiltPoint::Origin()};
  candidates.insert(candidates.end(), points.begin(), points.end());
  const std::size_t n = points.size();
  const std::size_t m = candidates.size();
  // Bitmask of the points each candidate covers.
  std::vector<std::uint32_t> covers(m, 0);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::log(TransitionTiltSvd(candidates[c], points[i])) <= radius + 1e-12) {
        covers[c] |= 1u << i;
      }
    }
  }
  std::optional<int> best;
  for (std::uint32_t subset = 1; subset < (1u << m); ++subset) {
    const int size = std::popcount(subset);
    if (best && size >= *best) continue;
    std::uint32_t covered = 0;
    for (std::size_t c = 0; c < m; ++c) {
      if (subset & (1u << c)) covered |= covers[c];
    }
    if (static_cast<double>(std::popcount(covered)) >= min_ratio * static_cast<double>(n) - 1e-12) {
      best = size;
    }
  }
  return best;
}

PoseScene MakePoseScene(std::uint64_t seed, int count, double noise_px, double outlier_fraction) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, noise_px);
  PoseScene s;
  s.k = CameraIntrinsics{500.0, 500.0, 320.0, 240.0};
  const Eigen::Vector3d axis(u(rng), u(rng), u(rng));
  s.rotation = AxisAngle(axis, 10.0 + 20.0 * std::abs(u(rng)));
  s.translation = Eigen::Vector3d(u(rng), 0.3 * u(rng), 0.2 * u(rng)).normalized();
  const int outliers = static_cast<int>(std::lround(outlier_fraction * count));
  while (static_cast<int>(s.pts_a.size()) < count) {
    const Eigen::Vector2d pa(320.0 + 300.0 * u(rng), 240.0 + 220.0 * u(rng));
    const double depth = 4.0 + 3.0 * (u(rng) + 1.0);
    const Eigen::Vector3d xa = depth * (s.k.KInverse() * pa.homogeneous());
    const Eigen::Vector3d xb = s.rotation * xa + s.translation;
    if (xb.z() < 0.5) continue;
    const Eigen::Vector3d pb = s.k.K() * xb;
    Eigen::Vector2d b = pb.hnormalized();
    if (b.x() < 0 || b.y() < 0 || b.x() > 639 || b.y() > 479) continue;
    // The first `outliers` points are outliers; callers do not rely on order.
    const bool inlier = static_cast<int>(s.pts_a.size()) >= outliers;
    Eigen::Vector2d a = pa;
    if (inlier) {
      a += Eigen::Vector2d(noise(rng), noise(rng));
      b += Eigen::Vector2d(noise(rng), noise(rng));
    } else {
      b = Eigen::Vector2d(320.0 + 320.0 * u(rng), 240.0 + 240.0 * u(rng));
    }
    s.pts_a.push_back(a);
    s.pts_b.push_back(b);
    s.inlier.push_back(inlier);
  }
  return s;
}

double DenseMae(const Eigen::Matrix3d& h_est, const Eigen::Matrix3d& h_gt, int wa, int ha, int wb,
                int hb) {
  double sum = 0.0;
  long count = 0;
  for (int y = 0; y < ha; ++y) {
    for (int x = 0; x < wa; ++x) {
      const Eigen::Vector3d g = h_gt * Eigen::Vector3d(x, y, 1.0);
      if (g.z() <= 0.0) continue;
      const double gx = g.x() / g.z();
      const double gy = g.y() / g.z();
      if (gx < 0.0 || gy < 0.0 || gx > wb - 1 || gy > hb - 1) continue;
      const Eigen::Vector3d e = h_est * Eigen::Vector3d(x, y, 1.0);
      sum += std::hypot(e.x() / e.z() - gx, e.y() / e.z() - gy);
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : -1.0;
}

Image TextureImage(int width, int height, std::uint64_t seed) {
  const int size = std::max(64, static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::max(width, height)))));
  const Image tex = ProceduralTexture(size, seed);
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out.at(x, y) = tex.at(x, y);
  }
  return out;
}

}  // namespace rectmatch::testing
