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

// Sampling and conditioning helpers shared by the RANSAC estimators.
#ifndef RECTMATCH_SRC_RANSAC_UTIL_HPP_
#define RECTMATCH_SRC_RANSAC_UTIL_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rectmatch::detail {

// k distinct indices in [0, n) (partial Fisher-Yates).
template <std::size_t K>
std::array<int, K> SampleDistinct(int n, std::mt19937_64& rng) {
  std::array<int, K> out{};
  for (std::size_t i = 0; i < K; ++i) {
    bool fresh = false;
    int candidate = 0;
    while (!fresh) {
      candidate = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      fresh = true;
      for (std::size_t j = 0; j < i; ++j) fresh = fresh && out[j] != candidate;
    }
    out[i] = candidate;
  }
  return out;
}

// Isotropic conditioning: centroid to the origin, mean distance sqrt(2).
inline Eigen::Matrix3d ConditioningTransform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread += (p - mean).norm();
  spread /= static_cast<double>(pts.size());
  const double s = spread > 0.0 ? std::sqrt(2.0) / spread : 1.0;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * mean.x(), 0.0, s, -s * mean.y(), 0.0, 0.0, 1.0;
  return t;
}

inline Eigen::Vector2d ApplyTransform(const Eigen::Matrix3d& t, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = t * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return q.head<2>() / q.z();
}

}  // namespace rectmatch::detail

#endif  // RECTMATCH_SRC_RANSAC_UTIL_HPP_
