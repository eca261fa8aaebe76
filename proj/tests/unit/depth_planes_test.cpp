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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "rectmatch/depth_planes.hpp"
#include "rectmatch/error.hpp"
#include "rectmatch/geometry.hpp"
#include "test_support.hpp"

namespace rectmatch {
namespace {

constexpr double kPi = std::numbers::pi;

double AngleDeg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / kPi;
}

const CameraIntrinsics kK{300.0, 300.0, 40.0, 30.0};

// Depth of the plane n . X = d seen by a camera at the origin.
DepthMap PlaneDepth(int w, int h, const Eigen::Vector3d& n, double d) {
  DepthMap depth(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d ray = kK.KInverse() * Eigen::Vector3d(x, y, 1.0);
      depth.at(x, y) = static_cast<float>(d / n.dot(ray) * ray.z());
    }
  }
  return depth;
}

NormalMap UniformNormals(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  NormalMap m;
  m.width = count;
  m.height = 1;
  for (int i = 0; i < count; ++i) {
    Eigen::Vector3d v(g(rng), g(rng), g(rng));
    v.normalize();
    if (v.z() > 0) v = -v;
    m.normals.push_back(v);
    m.valid.push_back(1);
  }
  return m;
}

NormalMap ConstantNormals(int w, int h, const Eigen::Vector3d& n) {
  NormalMap m;
  m.width = w;
  m.height = h;
  m.normals.assign(static_cast<std::size_t>(w) * h, n);
  m.valid.assign(static_cast<std::size_t>(w) * h, 1);
  return m;
}

TEST(NormalsFromDepth, FrontoParallelPlane) {
  const NormalMap m = NormalsFromDepth(DepthMap(80, 60, 4.0f), kK);
  EXPECT_EQ(m.ValidCount(), 78u * 58u);
  for (int y = 1; y < 59; ++y) {
    for (int x = 1; x < 79; ++x) {
      ASSERT_TRUE(m.Valid(x, y));
      EXPECT_LT((m.at(x, y) - Eigen::Vector3d(0, 0, -1)).norm(), 1e-6);
    }
  }
  EXPECT_FALSE(m.Valid(0, 10));
  EXPECT_FALSE(m.Valid(79, 10));
}

TEST(NormalsFromDepth, TiltedAnalyticPlane) {
  const double a = 30.0 * kPi / 180.0;
  const Eigen::Vector3d n(std::sin(a), 0.0, -std::cos(a));
  const NormalMap m = NormalsFromDepth(PlaneDepth(80, 60, n, -5.0 * std::cos(a)), kK);
  for (int y = 1; y < 59; ++y) {
    for (int x = 1; x < 79; ++x) {
      ASSERT_TRUE(m.Valid(x, y));
      EXPECT_LT(AngleDeg(m.at(x, y), n), 0.5);
      EXPECT_NEAR(m.at(x, y).norm(), 1.0, 1e-6);
    }
  }
}

TEST(NormalsFromDepth, HoleInvalidatesItsNeighbourhood) {
  DepthMap d(20, 20, 3.0f);
  d.at(10, 10) = 0.0f;
  const NormalMap m = NormalsFromDepth(d, kK);
  EXPECT_FALSE(m.Valid(10, 10));
  EXPECT_FALSE(m.Valid(9, 10));
  EXPECT_FALSE(m.Valid(11, 10));
  EXPECT_FALSE(m.Valid(10, 9));
  EXPECT_FALSE(m.Valid(10, 11));
  EXPECT_TRUE(m.Valid(9, 9));
  EXPECT_TRUE(m.Valid(12, 10));
}

TEST(SphereBuckets, Examples) {
  const auto one = SphereBuckets(1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(std::abs(one[0].z()), 1.0, 1e-12);

  const auto two = SphereBuckets(2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_GE(AngleDeg(two[0], two[1]), 90.0);

  const auto pts = SphereBuckets(500);
  ASSERT_EQ(pts.size(), 500u);
  double min_angle = kPi;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(pts[i].norm(), 1.0, 1e-12);
    for (std::size_t j = 0; j < i; ++j) {
      min_angle = std::min(min_angle, std::acos(std::clamp(pts[i].dot(pts[j]), -1.0, 1.0)));
    }
  }
  EXPECT_GE(min_angle, 0.6 * std::sqrt(4.0 * kPi / 500.0));
  EXPECT_EQ(SphereBuckets(500), pts);
  EXPECT_THROW(SphereBuckets(0), Error);
}

TEST(ClusterNormals, SingleFrontoParallelPlane) {
  const NormalMap m = NormalsFromDepth(DepthMap(60, 40, 2.0f), kK);
  const auto buckets = SphereBuckets(500);
  const auto clusters = ClusterNormals(m, buckets, 10);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_LT(AngleDeg(clusters[0].mean_normal, Eigen::Vector3d(0, 0, -1)), 0.5);
  EXPECT_NEAR(clusters[0].member_pixel_fraction, 1.0, 1e-12);
}

TEST(ClusterNormals, UniformNormalsWithHighThresholdGiveNothing) {
  const NormalMap m = UniformNormals(5000, 3);
  const auto buckets = SphereBuckets(500);
  EXPECT_TRUE(ClusterNormals(m, buckets, 501).empty());
  // Lower thresholds do find clusters, with non-increasing votes and
  // conserved claims.
  const auto clusters = ClusterNormals(m, buckets, 20, ClusterRefinement::kNone);
  ASSERT_FALSE(clusters.empty());
  double claimed = 0.0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    EXPECT_GE(clusters[i].vote_count, 20);
    if (i > 0) EXPECT_LE(clusters[i].vote_count, clusters[i - 1].vote_count);
    EXPECT_NEAR(clusters[i].mean_normal.norm(), 1.0, 1e-6);
    claimed += clusters[i].member_pixel_fraction;
  }
  EXPECT_LE(claimed, 1.0 + 1e-12);
}

TEST(ClusterNormals, MeanShiftRefinesTowardsTheMode) {
  const Eigen::Vector3d n = Eigen::Vector3d(0.3, -0.2, -1.0).normalized();
  const NormalMap m = ConstantNormals(30, 30, n);
  const auto buckets = SphereBuckets(500);
  for (auto refine : {ClusterRefinement::kMean, ClusterRefinement::kMeanShift}) {
    const auto c = ClusterNormals(m, buckets, 1, refine);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_LT(AngleDeg(c[0].mean_normal, n), 0.1);
  }
  // Without refinement the center stays on a bucket.
  const auto raw = ClusterNormals(m, buckets, 1, ClusterRefinement::kNone);
  ASSERT_EQ(raw.size(), 1u);
  EXPECT_NE(std::find(buckets.begin(), buckets.end(), raw[0].mean_normal), buckets.end());
}

std::vector<PlaneCluster> ClustersWithAngles(double a01, double a02, double a12) {
  auto c = [](double deg) { return std::cos(deg * kPi / 180.0); };
  Eigen::Matrix3d g;
  g << 1, c(a01), c(a02), c(a01), 1, c(a12), c(a02), c(a12), 1;
  const Eigen::Matrix3d l = g.llt().matrixL();
  const Eigen::Matrix3d to_camera =
      MinimalRotation(Eigen::Vector3d(1, 1, 1).normalized(), Eigen::Vector3d(0, 0, -1));
  std::vector<PlaneCluster> out(3);
  for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)].mean_normal = to_camera * l.row(i).transpose();
  return out;
}

TEST(OrthogonalizeClusters, Examples) {
  const auto ortho = ClustersWithAngles(90, 90, 90);
  const auto same = OrthogonalizeClusters(ortho);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((same[static_cast<std::size_t>(i)].mean_normal - ortho[static_cast<std::size_t>(i)].mean_normal).norm(), 1e-9);
  }

  const auto skew = ClustersWithAngles(85, 88, 92);
  const auto fixed = OrthogonalizeClusters(skew);
  ASSERT_EQ(fixed.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT(AngleDeg(fixed[i].mean_normal, skew[i].mean_normal), 5.0);
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_NEAR(AngleDeg(fixed[i].mean_normal, fixed[j].mean_normal), 90.0, 1e-6);
    }
  }

  const std::vector<PlaneCluster> single = {skew[0]};
  EXPECT_EQ(OrthogonalizeClusters(single)[0].mean_normal, skew[0].mean_normal);
  std::vector<PlaneCluster> four(4);
  try {
    OrthogonalizeClusters(four);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooManyClusters);
  }
}

TEST(ConnectedComponents, FourConnectivity) {
  SegmentMask m = SegmentMask::Empty(5, 4);
  m.Set(0, 0, true);
  m.Set(1, 1, true);  // diagonal only: separate
  m.Set(3, 1, true);
  m.Set(3, 2, true);
  int count = 0;
  const auto labels = ConnectedComponents(m, &count);
  EXPECT_EQ(count, 3);
  EXPECT_EQ(labels[0], labels[0]);
  EXPECT_NE(labels[0], labels[1 * 5 + 1]);
  EXPECT_EQ(labels[1 * 5 + 3], labels[2 * 5 + 3]);
  EXPECT_EQ(labels[2 * 5 + 0], -1);
}

TEST(SegmentClusters, SmallComponentGoesToResidual) {
  const Eigen::Vector3d n(0, 0, -1);
  NormalMap m = ConstantNormals(40, 20, Eigen::Vector3d(1, 0, -1).normalized());
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 40; ++x) {
      const bool big = x < 15;
      const bool small = x >= 30 && x < 33 && y < 3;
      if (big || small) m.normals[static_cast<std::size_t>(y) * 40 + x] = n;
    }
  }
  m.valid[5] = 0;
  PlaneCluster c;
  c.mean_normal = n;
  const std::vector<PlaneCluster> clusters = {c};
  const PlaneSegmentation seg = SegmentClusters(m, clusters, 20, 0.1);
  ASSERT_EQ(seg.segments.size(), 1u);
  EXPECT_EQ(seg.segments[0].Area(), 15u * 20u - 1u);
  EXPECT_EQ(seg.segments[0].cluster_id, 0);
  EXPECT_EQ(seg.residual.Area(), m.ValidCount() - seg.segments[0].Area());
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 40; ++x) {
      const bool valid = m.Valid(x, y);
      EXPECT_EQ(seg.segments[0].Test(x, y) + seg.residual.Test(x, y), valid ? 1 : 0);
    }
  }

  const PlaneSegmentation none = SegmentClusters(m, {}, 20, 0.1);
  EXPECT_TRUE(none.segments.empty());
  EXPECT_EQ(none.residual.Area(), m.ValidCount());
}

TEST(FrontoParallelHomography, Examples) {
  const Eigen::Vector2d centroid(40, 30);
  const Eigen::Matrix3d id = FrontoParallelHomography(Eigen::Vector3d(0, 0, -1), kK, centroid);
  EXPECT_LT((id / id(2, 2) - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  try {
    FrontoParallelHomography(Eigen::Vector3d(0, 0.6, 0.8), kK, centroid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNormalFacesAway);
  }
}

// The map from in-plane metric coordinates to the rectified image must be a
// similarity: its Jacobian has tilt 1 everywhere on the plane.
TEST(FrontoParallelHomography, RectifiesAnAnalyticPlane) {
  const double a = 30.0 * kPi / 180.0;
  const Eigen::Vector3d n(0.0, std::sin(a), -std::cos(a));
  const double d = -5.0 * std::cos(a);
  const Eigen::Vector2d centroid(40, 30);
  const Eigen::Matrix3d h = FrontoParallelHomography(n, kK, centroid);
  EXPECT_NEAR(HomographyJacobian(h, centroid).determinant(), 1.0, 1e-9);

  const Eigen::Vector3d u = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d v = n.cross(u).normalized();
  const Eigen::Vector3d origin = d * n;  // closest plane point
  auto image_of = [&](double s, double t) {
    const Eigen::Vector3d x = origin + s * u + t * v;
    return ApplyHomography(h, (kK.K() * x).hnormalized());
  };
  for (double s : {-1.0, 0.0, 1.5}) {
    for (double t : {-1.0, 0.5, 2.0}) {
      const double e = 1e-5;
      Eigen::Matrix2d j;
      j.col(0) = (image_of(s + e, t) - image_of(s - e, t)) / (2 * e);
      j.col(1) = (image_of(s, t + e) - image_of(s, t - e)) / (2 * e);
      EXPECT_LT(SingularValueRatio(j), 1.0 + 1e-5);
    }
  }
}

TEST(MinimalRotation, MapsVectorsAndHandlesAntipodes) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d a = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    const Eigen::Vector3d b = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    const Eigen::Matrix3d r = MinimalRotation(a, b);
    EXPECT_LT((r * a - b).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    // Minimal: the rotation angle equals the angle between the vectors.
    EXPECT_NEAR(testing::QuaternionAngleDeg(r, Eigen::Matrix3d::Identity()), AngleDeg(a, b), 1e-9);
  }
  const Eigen::Vector3d z(0, 0, 1);
  EXPECT_LT((MinimalRotation(z, -z) * z + z).norm(), 1e-12);
}

}  // namespace
}  // namespace rectmatch
