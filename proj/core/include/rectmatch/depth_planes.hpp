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

#ifndef RECTMATCH_DEPTH_PLANES_HPP_
#define RECTMATCH_DEPTH_PLANES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rectmatch/camera.hpp"
#include "rectmatch/image.hpp"
#include "rectmatch/shape_field.hpp"

namespace rectmatch {

// Per-pixel camera-frame unit normals facing the camera (n_z < 0).
struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> normals;
  std::vector<std::uint8_t> valid;

  bool Valid(int x, int y) const { return valid[Index(x, y)] != 0; }
  const Eigen::Vector3d& at(int x, int y) const { return normals[Index(x, y)]; }
  std::size_t ValidCount() const;

 private:
  std::size_t Index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

// Central differences of the back-projected surface depth * K^-1 (u, v, 1).
// Border pixels and pixels touching invalid depth are invalid.
NormalMap NormalsFromDepth(const DepthMap& depth, const CameraIntrinsics& intrinsics);

// Roughly equidistant points on the unit sphere from the generalised spiral.
// Heights are offset by half a step so that no two points crowd a pole.
std::vector<Eigen::Vector3d> SphereBuckets(int n);

// Equal-area angular spacing sqrt(4 pi / n) of n points on the sphere.
double BucketSpacing(std::size_t bucket_count);
// Angular radius within which a bucket claims normals: 1.5 x spacing.
double BucketAssignmentRadius(std::size_t bucket_count);

enum class ClusterRefinement { kNone, kMean, kMeanShift };

struct PlaneCluster {
  Eigen::Vector3d mean_normal = Eigen::Vector3d(0.0, 0.0, -1.0);
  int vote_count = 0;                  // bucket votes at extraction
  double member_pixel_fraction = 0.0;  // claimed / valid normals
};

// Greedy bucket voting; clusters come out in extraction order, with
// non-increasing vote counts.
std::vector<PlaneCluster> ClusterNormals(const NormalMap& normals,
                                         std::span<const Eigen::Vector3d> buckets,
                                         int min_votes,
                                         ClusterRefinement refine = ClusterRefinement::kMean);

// Nearest orthonormal set (polar factor) of up to three cluster normals.
std::vector<PlaneCluster> OrthogonalizeClusters(std::span<const PlaneCluster> clusters);

struct PlaneSegmentation {
  std::vector<SegmentMask> segments;  // cluster_id set, area >= min_area
  SegmentMask residual;               // valid pixels in no kept segment
};

// 4-connected components of per-cluster membership (nearest cluster within
// assignment_radius radians).
PlaneSegmentation SegmentClusters(const NormalMap& normals,
                                  std::span<const PlaneCluster> clusters,
                                  std::size_t min_area, double assignment_radius);

// Labels 4-connected components of a mask; returns labels (-1 outside the
// mask) and the component count.
std::vector<int> ConnectedComponents(const SegmentMask& mask, int* count);

// S * K R K^-1 where R is the minimal rotation taking n to (0, 0, -1) and S an
// isotropic scale making the Jacobian determinant 1 at `centroid`.
Eigen::Matrix3d FrontoParallelHomography(const Eigen::Vector3d& normal,
                                         const CameraIntrinsics& intrinsics,
                                         const Eigen::Vector2d& centroid);

// Minimal rotation taking unit vector `from` onto unit vector `to`.
Eigen::Matrix3d MinimalRotation(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

}  // namespace rectmatch

#endif  // RECTMATCH_DEPTH_PLANES_HPP_
