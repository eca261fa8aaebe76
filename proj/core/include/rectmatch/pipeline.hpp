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

#ifndef RECTMATCH_PIPELINE_HPP_
#define RECTMATCH_PIPELINE_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "rectmatch/camera.hpp"
#include "rectmatch/features.hpp"
#include "rectmatch/image.hpp"
#include "rectmatch/method_config.hpp"
#include "rectmatch/shape_field.hpp"
#include "rectmatch/warping.hpp"

namespace rectmatch {

struct ImageInputs {
  Image image;
  CameraIntrinsics intrinsics;
  std::optional<DepthMap> depth;
  std::optional<DenseShapeField> shapes;
};

struct GroundTruth {
  std::optional<Eigen::Matrix3d> rotation;  // X_b = R X_a + t
  std::optional<Eigen::Vector3d> translation;
  std::optional<Eigen::Matrix3d> homography;  // a -> b
};

// Wall-clock seconds per pipeline stage, summed over both images.
struct StageTimings {
  double segmentation = 0.0;
  double covering = 0.0;
  double warping = 0.0;
  double detection = 0.0;
  double matching = 0.0;
  double estimation = 0.0;

  double Total() const {
    return segmentation + covering + warping + detection + matching + estimation;
  }
};

struct RunStats {
  double total_warp_area_px = 0.0;
  std::size_t keypoint_count = 0;
  std::size_t component_count = 0;
  double rectifications_per_component = 0.0;

  bool operator==(const RunStats&) const = default;
};

enum class EvaluationMode { kRotation, kHomography };
std::string EvaluationModeName(EvaluationMode mode);

struct PairEvaluation {
  std::string pair_id;
  std::string method;
  EvaluationMode mode = EvaluationMode::kRotation;
  std::optional<double> rotation_error_deg;
  std::optional<double> mae_px;
  bool accurate = false;
  std::string failure;  // why no estimate was produced; empty otherwise
  Eigen::Matrix3d estimate = Eigen::Matrix3d::Identity();  // R or H
  int match_count = 0;
  int inlier_count = 0;
  RunStats stats;
  StageTimings timings;

  // Equality of everything except the method name and the timings.
  bool SameResult(const PairEvaluation& other) const;
};

// Everything one image contributes: the warps that were run and the merged
// features in original-image coordinates. records[0] is the identity over the
// whole image (the original features); component 0 is that global component.
struct ImageRectification {
  std::vector<WarpRecord> records;
  std::vector<int> record_component;
  std::vector<SegmentMask> warp_valid;  // valid output pixels per record
  std::size_t component_count = 0;
  FeatureSet features;
  nlohmann::json covering = nlohmann::json::array();
  std::vector<std::string> skipped;  // warps rejected (e.g. oversize)
};

struct PipelineHooks {
  std::function<void(char image, std::size_t record, const WarpResult& warp)> on_warp;
  std::function<void(char image, const nlohmann::json& covering)> on_covering;
};

ImageRectification RectifyImage(const ImageInputs& input, const MethodConfig& config,
                                StageTimings* timings = nullptr,
                                const PipelineHooks* hooks = nullptr, char tag = 'a');

RunStats ComputeRunStats(const ImageRectification& a, const ImageRectification& b);

struct PairArtifacts {
  ImageRectification a;
  ImageRectification b;
  std::vector<Match> matches;
};

// Runs the full pipeline on one pair and scores it against `truth`: rotation
// mode when a rotation is given, homography mode otherwise (or when the pose
// problem is plane dominated and a homography is available).
PairEvaluation RunPair(const std::string& pair_id, const ImageInputs& a, const ImageInputs& b,
                       const GroundTruth& truth, const MethodConfig& config,
                       const PipelineHooks* hooks = nullptr, PairArtifacts* artifacts = nullptr);

nlohmann::json PairEvaluationToJson(const PairEvaluation& evaluation);
PairEvaluation PairEvaluationFromJson(const nlohmann::json& j);

}  // namespace rectmatch

#endif  // RECTMATCH_PIPELINE_HPP_
