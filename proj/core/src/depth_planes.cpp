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

#include "rectmatch/depth_planes.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "rectmatch/error.hpp"
#include "rectmatch/geometry.hpp"

namespace rectmatch {
namespace {

constexpr double kPi = std::numbers::pi;

double AngleBetween(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Eigen::Vector3d FoldToCamera(const Eigen::Vector3d& n) { return n.z() > 0.0 ? Eigen::Vector3d(-n) : n; }

std::size_t NearestBucket(const Eigen::Vector3d& n, std::span<const Eigen::Vector3d> buckets) {
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    const double d = n.dot(buckets[b]);
    if (d > best_dot) {
      best_dot = d;
      best = b;
    }
  }
  return best;
}

Eigen::Vector3d MeanShift(const std::vector<Eigen::Vector3d>& members, Eigen::Vector3d center,
                          double bandwidth) {
  constexpr double kStopShift = 0.1 * kPi / 180.0;
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& n : members) {
      const double angle = AngleBetween(n, center);
      sum += std::exp(-0.5 * angle * angle / (bandwidth * bandwidth)) * n;
    }
    if (sum.norm() == 0.0) break;
    const Eigen::Vector3d next = sum.normalized();
    const double shift = AngleBetween(next, center);
    center = next;
    if (shift < kStopShift) break;
  }
  return center;
}

}  // namespace

std::size_t NormalMap::ValidCount() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

NormalMap NormalsFromDepth(const DepthMap& depth, const CameraIntrinsics& intrinsics) {
  intrinsics.Validate();
  if (depth.width <= 0 || depth.height <= 0 ||
      depth.meters.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    Fail(ErrorCode::kDimensionMismatch, "depth buffer does not match its dimensions");
  }
  const int w = depth.width;
  const int h = depth.height;
  NormalMap out;
  out.width = w;
  out.height = h;
  out.normals.assign(static_cast<std::size_t>(w) * h, Eigen::Vector3d::Zero());
  out.valid.assign(static_cast<std::size_t>(w) * h, 0);

  auto point = [&](int x, int y) {
    const double d = depth.at(x, y);
    return Eigen::Vector3d(d * (x - intrinsics.cx) / intrinsics.fx,
                           d * (y - intrinsics.cy) / intrinsics.fy, d);
  };
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      if (!depth.Valid(x, y) || !depth.Valid(x - 1, y) || !depth.Valid(x + 1, y) ||
          !depth.Valid(x, y - 1) || !depth.Valid(x, y + 1)) {
        continue;
      }
      const Eigen::Vector3d du = point(x + 1, y) - point(x - 1, y);
      const Eigen::Vector3d dv = point(x, y + 1) - point(x, y - 1);
      Eigen::Vector3d n = du.cross(dv);
      const double norm = n.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) continue;
      n /= norm;
      if (n.z() > 0.0) n = -n;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      out.normals[i] = n;
      out.valid[i] = 1;
    }
  }
  return out;
}

std::vector<Eigen::Vector3d> SphereBuckets(int n) {
  if (n < 1) Fail(ErrorCode::kInvalidParameter, "need at least one bucket");
  if (n == 1) return {Eigen::Vector3d(0.0, 0.0, -1.0)};
  std::vector<Eigen::Vector3d> points;
  points.reserve(static_cast<std::size_t>(n));
  const double step = 3.6 / std::sqrt(static_cast<double>(n));
  double azimuth = 0.0;
  for (int k = 0; k < n; ++k) {
    const double height = -1.0 + (2.0 * k + 1.0) / n;
    const double ring = std::sqrt(std::max(0.0, 1.0 - height * height));
    if (k > 0) azimuth = std::fmod(azimuth + step / ring, 2.0 * kPi);
    points.emplace_back(ring * std::cos(azimuth), ring * std::sin(azimuth), height);
  }
  return points;
}

double BucketSpacing(std::size_t bucket_count) {
  return std::sqrt(4.0 * kPi / static_cast<double>(bucket_count));
}

double BucketAssignmentRadius(std::size_t bucket_count) {
  return 1.5 * BucketSpacing(bucket_count);
}

std::vector<PlaneCluster> ClusterNormals(const NormalMap& normals,
                                         std::span<const Eigen::Vector3d> buckets,
                                         int min_votes, ClusterRefinement refine) {
  if (buckets.empty()) Fail(ErrorCode::kInvalidParameter, "no buckets");
  const double radius = BucketAssignmentRadius(buckets.size());

  std::vector<Eigen::Vector3d> folded;
  std::vector<std::size_t> nearest;
  for (std::size_t i = 0; i < normals.normals.size(); ++i) {
    if (!normals.valid[i]) continue;
    folded.push_back(FoldToCamera(normals.normals[i]));
    nearest.push_back(NearestBucket(folded.back(), buckets));
  }
  const std::size_t valid_count = folded.size();

  std::vector<int> votes(buckets.size(), 0);
  for (std::size_t b : nearest) ++votes[b];
  std::vector<bool> claimed(valid_count, false);

  std::vector<PlaneCluster> clusters;
  while (true) {
    const auto top = std::max_element(votes.begin(), votes.end());
    const int top_votes = *top;
    if (top_votes < std::max(1, min_votes)) break;
    const auto bucket = static_cast<std::size_t>(top - votes.begin());

    std::vector<Eigen::Vector3d> members;
    for (std::size_t i = 0; i < valid_count; ++i) {
      if (claimed[i] || AngleBetween(folded[i], buckets[bucket]) > radius) continue;
      claimed[i] = true;
      --votes[nearest[i]];
      members.push_back(folded[i]);
    }
    // Voters of this bucket that fell outside the claim radius are retired
    // with it.
    votes[bucket] = 0;

    PlaneCluster cluster;
    cluster.vote_count = top_votes;
    cluster.member_pixel_fraction =
        valid_count == 0 ? 0.0 : static_cast<double>(members.size()) / valid_count;
    Eigen::Vector3d center = buckets[bucket];
    if (refine != ClusterRefinement::kNone && !members.empty()) {
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      for (const auto& n : members) sum += n;
      if (sum.norm() > 0.0) center = sum.normalized();
      if (refine == ClusterRefinement::kMeanShift) {
        center = MeanShift(members, center, BucketSpacing(buckets.size()));
      }
    }
    cluster.mean_normal = FoldToCamera(center.normalized());
    clusters.push_back(cluster);
  }
  return clusters;
}

std::vector<PlaneCluster> OrthogonalizeClusters(std::span<const PlaneCluster> clusters) {
  if (clusters.size() > 3) Fail(ErrorCode::kTooManyClusters, "at most three plane normals");
  std::vector<PlaneCluster> out(clusters.begin(), clusters.end());
  if (clusters.size() <= 1) return out;

  Eigen::MatrixXd stacked(clusters.size(), 3);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    stacked.row(static_cast<Eigen::Index>(i)) = clusters[i].mean_normal.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::MatrixXd polar = svd.matrixU() * svd.matrixV().transpose();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    out[i].mean_normal = polar.row(static_cast<Eigen::Index>(i)).transpose().normalized();
  }
  return out;
}

std::vector<int> ConnectedComponents(const SegmentMask& mask, int* count) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
  std::vector<int> stack;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t start = static_cast<std::size_t>(y) * w + x;
      if (!mask.bits[start] || labels[start] >= 0) continue;
      labels[start] = next;
      stack.assign(1, static_cast<int>(start));
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int px = i % w;
        const int py = i / w;
        const int nx[4] = {px - 1, px + 1, px, px};
        const int ny[4] = {py, py, py - 1, py + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
          const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
          if (mask.bits[j] && labels[j] < 0) {
            labels[j] = next;
            stack.push_back(static_cast<int>(j));
          }
        }
      }
      ++next;
    }
  }
  if (count) *count = next;
  return labels;
}

PlaneSegmentation SegmentClusters(const NormalMap& normals,
                                  std::span<const PlaneCluster> clusters,
                                  std::size_t min_area, double assignment_radius) {
  const int w = normals.width;
  const int h = normals.height;
  std::vector<SegmentMask> membership(clusters.size(), SegmentMask::Empty(w, h));
  PlaneSegmentation out;
  out.residual = SegmentMask::Empty(w, h);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!normals.Valid(x, y)) continue;
      const Eigen::Vector3d n = FoldToCamera(normals.at(x, y));
      int best = -1;
      double best_angle = assignment_radius;
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        const double angle = AngleBetween(n, clusters[c].mean_normal);
        if (angle <= best_angle && (best < 0 || angle < best_angle)) {
          best = static_cast<int>(c);
          best_angle = angle;
        }
      }
      if (best >= 0) {
        membership[static_cast<std::size_t>(best)].Set(x, y, true);
      } else {
        out.residual.Set(x, y, true);
      }
    }
  }

  for (std::size_t c = 0; c < clusters.size(); ++c) {
    int count = 0;
    const std::vector<int> labels = ConnectedComponents(membership[c], &count);
    std::vector<std::size_t> areas(static_cast<std::size_t>(count), 0);
    for (int label : labels) {
      if (label >= 0) ++areas[static_cast<std::size_t>(label)];
    }
    std::vector<int> segment_of(static_cast<std::size_t>(count), -1);
    for (int k = 0; k < count; ++k) {
      if (areas[static_cast<std::size_t>(k)] < min_area) continue;
      segment_of[static_cast<std::size_t>(k)] = static_cast<int>(out.segments.size());
      SegmentMask segment = SegmentMask::Empty(w, h);
      segment.cluster_id = static_cast<int>(c);
      out.segments.push_back(std::move(segment));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0) continue;
      const int s = segment_of[static_cast<std::size_t>(labels[i])];
      if (s >= 0) {
        out.segments[static_cast<std::size_t>(s)].bits[i] = 1;
      } else {
        out.residual.bits[i] = 1;
      }
    }
  }
  return out;
}

Eigen::Matrix3d MinimalRotation(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector3d a = from.normalized();
  const Eigen::Vector3d b = to.normalized();
  const Eigen::Vector3d axis = a.cross(b);
  const double sin_angle = axis.norm();
  const double cos_angle = a.dot(b);
  if (sin_angle < 1e-15) {
    if (cos_angle > 0.0) return Eigen::Matrix3d::Identity();
    // Antiparallel: rotate by pi about any axis orthogonal to `a`.
    Eigen::Vector3d ortho = a.unitOrthogonal();
    return Eigen::AngleAxisd(kPi, ortho).toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(sin_angle, cos_angle), axis / sin_angle).toRotationMatrix();
}

Eigen::Matrix3d FrontoParallelHomography(const Eigen::Vector3d& normal,
                                         const CameraIntrinsics& intrinsics,
                                         const Eigen::Vector2d& centroid) {
  intrinsics.Validate();
  if (!(normal.z() < 0.0)) {
    Fail(ErrorCode::kNormalFacesAway, "plane normal must face the camera (n_z < 0)");
  }
  const Eigen::Matrix3d r = MinimalRotation(normal, Eigen::Vector3d(0.0, 0.0, -1.0));
  if (r == Eigen::Matrix3d::Identity()) return Eigen::Matrix3d::Identity();
  Eigen::Matrix3d h = intrinsics.K() * r * intrinsics.KInverse();
  const double det = HomographyJacobian(h, centroid).determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    Fail(ErrorCode::kSingularMap, "rectifying homography degenerates at the centroid");
  }
  const double scale = 1.0 / std::sqrt(det);
  h.row(0) *= scale;
  h.row(1) *= scale;
  return h;
}

}  // namespace rectmatch
