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

#ifndef RECTMATCH_METHOD_CONFIG_HPP_
#define RECTMATCH_METHOD_CONFIG_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rectmatch/covering.hpp"
#include "rectmatch/depth_planes.hpp"
#include "rectmatch/estimation.hpp"
#include "rectmatch/features.hpp"
#include "rectmatch/shape_field.hpp"

namespace rectmatch {

enum class Method { kUnrectified, kAffnetShapes, kDepthMap, kDenseAffnet, kDepthAffnet };

inline constexpr Method kAllMethods[] = {Method::kUnrectified, Method::kAffnetShapes,
                                         Method::kDepthMap, Method::kDenseAffnet,
                                         Method::kDepthAffnet};

std::string MethodName(Method method);
Method ParseMethod(const std::string& name);  // kInvalidParameter when unknown
bool MethodNeedsDepth(Method method);
bool MethodNeedsShapes(Method method);

enum class ShapeSource {
  kFileOrEstimate,  // use aux shape files, otherwise the structure tensor
  kFileOnly,        // missing files are an error
  kEstimate,        // always estimate
};

struct CoveringParams {
  double radius = kDefaultCoveringRadius;
  double min_ratio = kDefaultMinCoveredRatio;

  bool operator==(const CoveringParams&) const = default;
};

struct ClusteringParams {
  int bucket_count = 500;
  double min_votes_fraction = 0.01;  // of valid normals
  double min_area_fraction = 0.01;   // of image area
  ClusterRefinement refine = ClusterRefinement::kMean;
  bool orthogonalize = false;

  bool operator==(const ClusteringParams&) const = default;
};

struct MethodConfig {
  Method method = Method::kUnrectified;
  CoveringParams covering;
  ClusteringParams clustering;
  ShapeSource shape_source = ShapeSource::kFileOrEstimate;
  int shape_cell_size = 4;
  DetectorOptions detector;
  double ratio_threshold = 0.8;
  double dedupe_radius_px = 2.0;
  double blur_constant = 0.8;
  double max_warp_area_ratio = 16.0;
  RansacConfig ransac;
  double rotation_threshold_deg = 5.0;
  double mae_threshold_px = 5.0;
  std::vector<double> mae_thresholds = {1.0, 2.0, 3.0, 5.0, 10.0, 20.0};
  // A pose pair whose homography inliers reach this fraction of the
  // essential inliers is treated as plane dominated.
  double plane_dominance_ratio = 0.9;

  void Validate() const;  // kInvalidParameter
  bool operator==(const MethodConfig& other) const;
};

nlohmann::json MethodConfigToJson(const MethodConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
MethodConfig MethodConfigFromJson(const nlohmann::json& j);

}  // namespace rectmatch

#endif  // RECTMATCH_METHOD_CONFIG_HPP_
