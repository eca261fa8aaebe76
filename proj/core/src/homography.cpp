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
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rectmatch/error.hpp"
#include "rectmatch/estimation.hpp"
#include "ransac_util.hpp"

namespace rectmatch {
namespace {

constexpr int kHomographySample = 4;
constexpr int kMaxRefits = 5;

bool NearlyCollinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a;
  const Eigen::Vector2d v = c - a;
  const double cross = std::abs(u.x() * v.y() - u.y() * v.x());
  const double scale = std::max({u.squaredNorm(), v.squaredNorm(), (c - b).squaredNorm()});
  return !(cross > 1e-6 * scale);
}

bool DegenerateSample(const std::array<Eigen::Vector2d, kHomographySample>& p) {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        if (NearlyCollinear(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)],
                            p[static_cast<std::size_t>(k)])) {
          return true;
        }
      }
    }
  }
  return false;
}

int CountInliers(const Eigen::Matrix3d& h, std::span<const Eigen::Vector2d> pa,
                 std::span<const Eigen::Vector2d> pb, double threshold,
                 std::vector<std::uint8_t>* mask) {
  const Eigen::Matrix3d h_inv = h.inverse();
  int count = 0;
  if (mask) mask->assign(pa.size(), 0);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (SymmetricTransferError(h, h_inv, pa[i], pb[i]) <= threshold) {
      ++count;
      if (mask) (*mask)[i] = 1;
    }
  }
  return count;
}

bool Invertible(const Eigen::Matrix3d& h) {
  if (!h.allFinite()) return false;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h);
  const auto& s = svd.singularValues();
  return s[0] > 0.0 && s[2] > 1e-12 * s[0];
}

}  // namespace

double SymmetricTransferError(const Eigen::Matrix3d& h, const Eigen::Matrix3d& h_inverse,
                              const Eigen::Vector2d& pa, const Eigen::Vector2d& pb) {
  const Eigen::Vector3d fwd = h * Eigen::Vector3d(pa.x(), pa.y(), 1.0);
  const Eigen::Vector3d bwd = h_inverse * Eigen::Vector3d(pb.x(), pb.y(), 1.0);
  if (fwd.z() == 0.0 || bwd.z() == 0.0) return std::numeric_limits<double>::infinity();
  const double e1 = (fwd.head<2>() / fwd.z() - pb).squaredNorm();
  const double e2 = (bwd.head<2>() / bwd.z() - pa).squaredNorm();
  return std::sqrt(0.5 * (e1 + e2));
}

std::optional<Eigen::Matrix3d> SolveHomographyLinear(std::span<const Eigen::Vector2d> pa,
                                                     std::span<const Eigen::Vector2d> pb) {
  if (pa.size() != pb.size() || pa.size() < kHomographySample) return std::nullopt;
  const Eigen::Matrix3d ta = detail::ConditioningTransform(pa);
  const Eigen::Matrix3d tb = detail::ConditioningTransform(pb);
  Eigen::MatrixXd a(2 * static_cast<Eigen::Index>(pa.size()), 9);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const Eigen::Vector2d p = detail::ApplyTransform(ta, pa[i]);
    const Eigen::Vector2d q = detail::ApplyTransform(tb, pb[i]);
    const auto r = 2 * static_cast<Eigen::Index>(i);
    a.row(r) << -p.x(), -p.y(), -1.0, 0.0, 0.0, 0.0, q.x() * p.x(), q.x() * p.y(), q.x();
    a.row(r + 1) << 0.0, 0.0, 0.0, -p.x(), -p.y(), -1.0, q.y() * p.x(), q.y() * p.y(), q.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[7] < 1e-12 * sv[0]) return std::nullopt;
  const Eigen::VectorXd v = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  Eigen::Matrix3d h = tb.inverse() * hn * ta;
  if (h(2, 2) != 0.0) h /= h(2, 2);
  if (!Invertible(h)) return std::nullopt;
  return h;
}

HomographyEstimate EstimateHomography(std::span<const Eigen::Vector2d> pts_a,
                                      std::span<const Eigen::Vector2d> pts_b,
                                      const RansacConfig& config) {
  config.Validate();
  if (pts_a.size() != pts_b.size()) {
    Fail(ErrorCode::kDimensionMismatch, "correspondence lists differ in length");
  }
  const int n = static_cast<int>(pts_a.size());
  if (n < kHomographySample) {
    Fail(ErrorCode::kInsufficientMatches, "homography needs at least 4 matches");
  }

  Eigen::Matrix3d best_h = Eigen::Matrix3d::Identity();
  int best_count = -1;
  int limit = config.max_iterations;
  int iteration = 0;
  std::array<Eigen::Vector2d, kHomographySample> sa;
  std::array<Eigen::Vector2d, kHomographySample> sb;
  std::mt19937_64 rng(config.seed);
  for (; iteration < limit; ++iteration) {
    const auto sample = detail::SampleDistinct<kHomographySample>(n, rng);
    for (int k = 0; k < kHomographySample; ++k) {
      const auto idx = static_cast<std::size_t>(sample[static_cast<std::size_t>(k)]);
      sa[static_cast<std::size_t>(k)] = pts_a[idx];
      sb[static_cast<std::size_t>(k)] = pts_b[idx];
    }
    // Collinear draws are redrawn on the next iteration.
    if (DegenerateSample(sa) || DegenerateSample(sb)) continue;
    const auto h = SolveHomographyLinear(sa, sb);
    if (!h) continue;
    const int count = CountInliers(*h, pts_a, pts_b, config.threshold_px, nullptr);
    if (count > best_count) {
      best_count = count;
      best_h = *h;
      limit = std::min(limit, AdaptiveIterationCount(static_cast<double>(count) / n,
                                                     kHomographySample, config.confidence,
                                                     config.max_iterations));
    }
  }
  if (best_count < kHomographySample) {
    Fail(ErrorCode::kDegenerateConfiguration, "no homography hypothesis with 4 inliers");
  }

  std::vector<std::uint8_t> mask;
  CountInliers(best_h, pts_a, pts_b, config.threshold_px, &mask);
  for (int refit = 0; refit < kMaxRefits; ++refit) {
    std::vector<Eigen::Vector2d> ia;
    std::vector<Eigen::Vector2d> ib;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) {
        ia.push_back(pts_a[i]);
        ib.push_back(pts_b[i]);
      }
    }
    const auto h = SolveHomographyLinear(ia, ib);
    if (!h) break;
    std::vector<std::uint8_t> next;
    const int count = CountInliers(*h, pts_a, pts_b, config.threshold_px, &next);
    if (count < best_count) break;
    const bool stable = next == mask;
    best_h = *h;
    best_count = count;
    mask = std::move(next);
    if (stable) break;
  }

  HomographyEstimate out;
  out.homography = best_h;
  out.inlier_mask = std::move(mask);
  out.inlier_count = best_count;
  out.iterations = iteration;
  return out;
}

}  // namespace rectmatch
