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

#ifndef RECTMATCH_WARPING_HPP_
#define RECTMATCH_WARPING_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "rectmatch/geometry.hpp"
#include "rectmatch/image.hpp"

namespace rectmatch {

// Bookkeeping for one masked warp. A source pixel p lands at
// transform(p) - crop_offset in the cropped output.
struct WarpRecord {
  Eigen::Matrix3d transform = Eigen::Matrix3d::Identity();
  bool is_affine = true;
  Eigen::Vector2d crop_offset = Eigen::Vector2d::Zero();
  int warped_width = 0;
  int warped_height = 0;
  SegmentMask source_mask;
  double blur_sigma_major = 0.0;

  std::size_t Area() const {
    return static_cast<std::size_t>(warped_width) * static_cast<std::size_t>(warped_height);
  }
  bool IsIdentity() const;
  // Source-frame position -> cropped warped frame.
  Eigen::Vector2d Forward(const Eigen::Vector2d& source) const;
};

struct WarpOptions {
  double blur_constant = 0.8;
  // Homography warps whose output box exceeds this multiple of the mask
  // area are rejected.
  double max_area_ratio = 16.0;
};

struct WarpResult {
  Image image;
  SegmentMask valid;
  WarpRecord record;
};

WarpResult WarpMasked(const Image& image, const SegmentMask& mask, const AffineMap& map,
                      const WarpOptions& options = {});
WarpResult WarpMasked(const Image& image, const SegmentMask& mask,
                      const Eigen::Matrix3d& homography, const WarpOptions& options = {});

// Per-axis anti-aliasing widths for a linear map: source-space directions
// (columns) and Gaussian sigmas along them.
struct DirectionalBlur {
  Eigen::Matrix2d directions = Eigen::Matrix2d::Identity();
  Eigen::Vector2d sigmas = Eigen::Vector2d::Zero();
};
DirectionalBlur BlurForLinear(const Eigen::Matrix2d& linear, double blur_constant = 0.8);

// Masked 1D Gaussian blur along `direction` (unit, source pixels). Pixels
// outside `mask` neither receive nor contribute values.
Image DirectionalGaussianBlur(const Image& image, const SegmentMask& mask,
                              const Eigen::Vector2d& direction, double sigma);

std::vector<Eigen::Vector2d> BackprojectPoints(std::span<const Eigen::Vector2d> points,
                                               const WarpRecord& record);
Eigen::Vector2d BackprojectPoint(const Eigen::Vector2d& point, const WarpRecord& record);

nlohmann::json WarpRecordToJson(const WarpRecord& record);

}  // namespace rectmatch

#endif  // RECTMATCH_WARPING_HPP_
