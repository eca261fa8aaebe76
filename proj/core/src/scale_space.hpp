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

// Gaussian / difference-of-Gaussians pyramid shared by the detector and the
// descriptor.
#ifndef RECTMATCH_SRC_SCALE_SPACE_HPP_
#define RECTMATCH_SRC_SCALE_SPACE_HPP_

#include <vector>

#include "rectmatch/features.hpp"
#include "rectmatch/image.hpp"

namespace rectmatch::detail {

struct Octave {
  std::vector<Image> gaussians;  // scales_per_octave + 3 levels
  std::vector<Image> dogs;       // scales_per_octave + 2 levels
};

struct ScaleSpace {
  std::vector<Octave> octaves;
  int scales_per_octave = 3;
  double base_sigma = 1.6;

  // Level (octave, layer) whose blur is closest to `sigma` (input pixels).
  void Locate(double sigma, int* octave, int* layer) const;
};

ScaleSpace BuildScaleSpace(const Image& image, const DetectorOptions& options, bool with_dogs);

// Replaces invalid pixels by the mean of the valid ones.
Image FillInvalid(const Image& image, const SegmentMask& valid);

// `distance` (optional) holds per-pixel distance to the nearest invalid
// pixel of a frame `frame_width` pixels wide.
std::vector<Keypoint> DetectInScaleSpace(const ScaleSpace& space,
                                         const std::vector<double>* distance, int frame_width,
                                         const DetectorOptions& options);

DescriptorMatrix DescribeInScaleSpace(const ScaleSpace& space, std::vector<Keypoint>& keypoints);

}  // namespace rectmatch::detail

#endif  // RECTMATCH_SRC_SCALE_SPACE_HPP_
