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

#ifndef RECTMATCH_FEATURES_HPP_
#define RECTMATCH_FEATURES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rectmatch/image.hpp"

namespace rectmatch {

inline constexpr int kOriginalProvenance = -1;
inline constexpr int kDescriptorSize = 128;

struct Keypoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double scale = 0.0;        // Gaussian sigma in pixels of the detection frame
  double response = 0.0;     // signed DoG value at the refined extremum
  double orientation = 0.0;  // radians, filled in by description
  int provenance = kOriginalProvenance;

  bool operator==(const Keypoint&) const = default;
};

using DescriptorMatrix = Eigen::Matrix<float, kDescriptorSize, Eigen::Dynamic>;

// Keypoints with one unit-norm descriptor column each.
struct FeatureSet {
  std::vector<Keypoint> keypoints;
  DescriptorMatrix descriptors = DescriptorMatrix(kDescriptorSize, 0);

  std::size_t size() const noexcept { return keypoints.size(); }
  void Append(const FeatureSet& other);
  bool operator==(const FeatureSet& other) const;
};

struct DetectorOptions {
  int max_keypoints = 2000;
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double assumed_input_sigma = 0.5;
  double contrast_threshold = 0.04;  // on refined |DoG| * scales_per_octave
  double edge_ratio = 10.0;
  double invalid_margin_px = 8.0;
  int min_image_side = 32;

  bool operator==(const DetectorOptions&) const = default;
};

// Difference-of-Gaussians extrema with quadratic subpixel refinement,
// sorted by |response| and truncated. `valid` may be null (all valid).
std::vector<Keypoint> Detect(const Image& image, const SegmentMask* valid,
                             const DetectorOptions& options = {});

// Rotation-normalised 4x4x8 gradient histograms, square-rooted (RootSIFT),
// unit L2 norm. Sets keypoint orientation in place.
DescriptorMatrix Describe(const Image& image, std::vector<Keypoint>& keypoints,
                          const DetectorOptions& options = {});

FeatureSet DetectAndDescribe(const Image& image, const SegmentMask* valid,
                             const DetectorOptions& options = {});

// Exact Euclidean distance to the nearest zero of `mask` (infinity when the
// mask has no zeros).
std::vector<double> DistanceToInvalid(const SegmentMask& mask);

// Union of feature sets. Original-provenance features are always kept;
// rectified features closer than `dedupe_radius_px` keep the one with larger
// |response| (ties: lower warp index, then input order).
FeatureSet MergeFeatures(std::span<const FeatureSet> sets, double dedupe_radius_px = 2.0);

struct Match {
  int index_a = 0;
  int index_b = 0;
  double distance = 0.0;
  double ratio = 0.0;

  bool operator==(const Match&) const = default;
};

// Mutual nearest neighbours under L2 that pass the ratio test in both
// directions. Sorted by index_a.
std::vector<Match> MatchDescriptors(const DescriptorMatrix& a, const DescriptorMatrix& b,
                                    double ratio_threshold = 0.8);

double DescriptorDistance(const DescriptorMatrix& a, int ia, const DescriptorMatrix& b, int ib);

// MATCHSET container ("FEAT").
std::vector<std::uint8_t> EncodeFeatureSet(const FeatureSet& features);
FeatureSet DecodeFeatureSet(std::span<const std::uint8_t> bytes);
void SaveFeatureSet(const std::string& path, const FeatureSet& features);
FeatureSet LoadFeatureSet(const std::string& path);

}  // namespace rectmatch

#endif  // RECTMATCH_FEATURES_HPP_
