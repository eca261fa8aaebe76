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

#include "rectmatch/warping.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "rectmatch/error.hpp"

namespace rectmatch {
namespace {

// Bilinear sample that only mixes pixels inside `mask`, renormalising the
// remaining weights. Returns false when no contributing pixel is valid.
bool SampleMasked(const Image& image, const SegmentMask& mask, double x, double y, float* out) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const double wx[2] = {1.0 - ax, ax};
  const double wy[2] = {1.0 - ay, ay};
  double sum = 0.0;
  double total = 0.0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const double w = wx[dx] * wy[dy];
      if (w == 0.0 || !mask.InBoundsAndSet(x0 + dx, y0 + dy)) continue;
      sum += w * image.at(x0 + dx, y0 + dy);
      total += w;
    }
  }
  if (total <= 1e-12) return false;
  *out = static_cast<float>(sum / total);
  return true;
}

bool IsAffineMatrix(const Eigen::Matrix3d& m) {
  return m(2, 0) == 0.0 && m(2, 1) == 0.0 && m(2, 2) == 1.0;
}

Eigen::Vector2d Project(const Eigen::Matrix3d& m, const Eigen::Vector2d& p, double* w_out) {
  const Eigen::Vector3d q = m * p.homogeneous();
  if (w_out) *w_out = q.z();
  return q.head<2>() / q.z();
}

WarpResult WarpImpl(const Image& image, const SegmentMask& mask, const Eigen::Matrix3d& transform,
                    const Eigen::Matrix2d& blur_linear, const WarpOptions& options) {
  if (mask.width != image.width() || mask.height != image.height()) {
    Fail(ErrorCode::kDimensionMismatch, "mask and image dimensions differ");
  }
  const std::size_t mask_area = mask.Area();
  if (mask_area == 0) Fail(ErrorCode::kEmptyMask, "cannot warp an empty mask");
  if (!transform.allFinite() || std::abs(transform.determinant()) < 1e-300) {
    Fail(ErrorCode::kSingularMap, "warp transform is singular");
  }
  const bool is_affine = IsAffineMatrix(transform);

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.Test(x, y)) continue;
      double w = 1.0;
      const Eigen::Vector2d q = Project(transform, Eigen::Vector2d(x, y), &w);
      if (!(w > 0.0) || !q.allFinite()) {
        Fail(ErrorCode::kSingularMap, "mask crosses the line at infinity of the homography");
      }
      min_x = std::min(min_x, q.x());
      min_y = std::min(min_y, q.y());
      max_x = std::max(max_x, q.x());
      max_y = std::max(max_y, q.y());
    }
  }

  WarpRecord record;
  record.transform = transform;
  record.is_affine = is_affine;
  record.crop_offset = Eigen::Vector2d(std::floor(min_x), std::floor(min_y));
  const double box_w = std::floor(max_x) - std::floor(min_x) + 1.0;
  const double box_h = std::floor(max_y) - std::floor(min_y) + 1.0;
  if (!is_affine && box_w * box_h > options.max_area_ratio * static_cast<double>(mask_area)) {
    Fail(ErrorCode::kOversizeWarp, "homography warp output exceeds the area cap");
  }
  if (box_w * box_h > 1.0e9) Fail(ErrorCode::kOversizeWarp, "warp output is too large");
  record.warped_width = static_cast<int>(box_w);
  record.warped_height = static_cast<int>(box_h);
  record.source_mask = mask;

  const DirectionalBlur blur = BlurForLinear(blur_linear, options.blur_constant);
  record.blur_sigma_major = blur.sigmas.maxCoeff();
  Image source = image;
  for (int k = 0; k < 2; ++k) {
    if (blur.sigmas[k] > 0.0) {
      source = DirectionalGaussianBlur(source, mask, blur.directions.col(k), blur.sigmas[k]);
    }
  }

  const Eigen::Matrix3d inverse = transform.inverse();
  WarpResult result;
  result.image = Image(record.warped_width, record.warped_height, 0.0f);
  result.valid = SegmentMask::Empty(record.warped_width, record.warped_height);
  for (int v = 0; v < record.warped_height; ++v) {
    for (int u = 0; u < record.warped_width; ++u) {
      double w = 1.0;
      const Eigen::Vector2d s =
          Project(inverse, Eigen::Vector2d(u, v) + record.crop_offset, &w);
      if (!(w > 0.0) || !s.allFinite()) continue;
      const double rx = std::round(s.x());
      const double ry = std::round(s.y());
      if (rx < 0.0 || ry < 0.0 || rx >= mask.width || ry >= mask.height) continue;
      if (!mask.Test(static_cast<int>(rx), static_cast<int>(ry))) continue;
      float value = 0.0f;
      if (!SampleMasked(source, mask, s.x(), s.y(), &value)) continue;
      result.image.at(u, v) = value;
      result.valid.Set(u, v, true);
    }
  }
  result.record = std::move(record);
  return result;
}

}  // namespace

bool WarpRecord::IsIdentity() const {
  return transform == Eigen::Matrix3d::Identity() && crop_offset.isZero(0.0);
}

Eigen::Vector2d WarpRecord::Forward(const Eigen::Vector2d& source) const {
  return Project(transform, source, nullptr) - crop_offset;
}

DirectionalBlur BlurForLinear(const Eigen::Matrix2d& linear, double blur_constant) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(linear, Eigen::ComputeFullU | Eigen::ComputeFullV);
  DirectionalBlur blur;
  blur.directions = svd.matrixV();
  for (int k = 0; k < 2; ++k) {
    const double s = svd.singularValues()[k];
    // Only compressed directions need anti-aliasing; the source-space
    // sampling interval along V_k grows to 1/s.
    if (s < 1.0 - 1e-12) {
      const double c = 1.0 / s;
      blur.sigmas[k] = blur_constant * std::sqrt(c * c - 1.0);
    }
  }
  return blur;
}

Image DirectionalGaussianBlur(const Image& image, const SegmentMask& mask,
                              const Eigen::Vector2d& direction, double sigma) {
  if (!(sigma > 0.0)) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
  }
  const Eigen::Vector2d d = direction.normalized();
  const PixelBox box = BoundingBox(mask);
  Image out = image;
  for (int y = box.min_y; y <= box.max_y; ++y) {
    for (int x = box.min_x; x <= box.max_x; ++x) {
      if (!mask.Test(x, y)) continue;
      double sum = 0.0;
      double total = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        float value = 0.0f;
        if (!SampleMasked(image, mask, x + k * d.x(), y + k * d.y(), &value)) continue;
        const double g = kernel[static_cast<std::size_t>(k + radius)];
        sum += g * value;
        total += g;
      }
      if (total > 0.0) out.at(x, y) = static_cast<float>(sum / total);
    }
  }
  return out;
}

WarpResult WarpMasked(const Image& image, const SegmentMask& mask, const AffineMap& map,
                      const WarpOptions& options) {
  return WarpImpl(image, mask, map.ToMatrix3(), map.linear(), options);
}

WarpResult WarpMasked(const Image& image, const SegmentMask& mask,
                      const Eigen::Matrix3d& homography, const WarpOptions& options) {
  if (mask.width != image.width() || mask.height != image.height()) {
    Fail(ErrorCode::kDimensionMismatch, "mask and image dimensions differ");
  }
  if (mask.Area() == 0) Fail(ErrorCode::kEmptyMask, "cannot warp an empty mask");
  if (!homography.allFinite() || std::abs(homography.determinant()) < 1e-300) {
    Fail(ErrorCode::kSingularMap, "homography is singular");
  }
  // Anti-aliasing follows the local linearisation at the mask centroid.
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  double count = 0.0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.Test(x, y)) {
        centroid += Eigen::Vector2d(x, y);
        count += 1.0;
      }
    }
  }
  centroid /= count;
  const Eigen::Matrix3d h =
      homography(2, 2) != 0.0 ? Eigen::Matrix3d(homography / homography(2, 2)) : homography;
  const Eigen::Matrix2d jacobian = HomographyJacobian(h, centroid);
  if (!jacobian.allFinite() || std::abs(jacobian.determinant()) < 1e-300) {
    Fail(ErrorCode::kSingularMap, "homography is singular at the mask centroid");
  }
  return WarpImpl(image, mask, h, jacobian, options);
}

Eigen::Vector2d BackprojectPoint(const Eigen::Vector2d& point, const WarpRecord& record) {
  const auto pts = BackprojectPoints(std::span<const Eigen::Vector2d>(&point, 1), record);
  return pts.front();
}

std::vector<Eigen::Vector2d> BackprojectPoints(std::span<const Eigen::Vector2d> points,
                                               const WarpRecord& record) {
  if (!record.transform.allFinite() || std::abs(record.transform.determinant()) < 1e-300) {
    Fail(ErrorCode::kSingularMap, "warp record transform is singular");
  }
  std::vector<Eigen::Vector2d> out;
  out.reserve(points.size());
  if (record.is_affine) {
    const AffineMap inverse = AffineMap(record.transform.topLeftCorner<2, 2>(),
                                        record.transform.topRightCorner<2, 1>())
                                  .Inverse();
    for (const auto& p : points) out.push_back(inverse.Apply(p + record.crop_offset));
    return out;
  }
  const Eigen::Matrix3d inverse = record.transform.inverse();
  for (const auto& p : points) {
    double w = 0.0;
    const Eigen::Vector2d s = Project(inverse, p + record.crop_offset, &w);
    if (w == 0.0 || !s.allFinite()) Fail(ErrorCode::kSingularMap, "point maps to infinity");
    out.push_back(s);
  }
  return out;
}

nlohmann::json WarpRecordToJson(const WarpRecord& record) {
  nlohmann::json transform = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    transform.push_back({record.transform(r, 0), record.transform(r, 1), record.transform(r, 2)});
  }
  const PixelBox box = BoundingBox(record.source_mask);
  return {{"transform", transform},
          {"is_affine", record.is_affine},
          {"crop_offset", {record.crop_offset.x(), record.crop_offset.y()}},
          {"warped_size", {record.warped_width, record.warped_height}},
          {"source_mask_area", record.source_mask.Area()},
          {"source_mask_bbox", {box.min_x, box.min_y, box.max_x, box.max_y}},
          {"blur_sigma_major", record.blur_sigma_major}};
}

}  // namespace rectmatch
