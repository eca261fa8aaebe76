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

#include "rectmatch/method_config.hpp"

#include <cmath>
#include <set>

#include "rectmatch/error.hpp"

namespace rectmatch {
namespace {

using nlohmann::json;

struct Names {
  Method method;
  const char* name;
};
constexpr Names kMethodNames[] = {{Method::kUnrectified, "unrectified"},
                                  {Method::kAffnetShapes, "affnet_shapes"},
                                  {Method::kDepthMap, "depth_map"},
                                  {Method::kDenseAffnet, "dense_affnet"},
                                  {Method::kDepthAffnet, "depth_affnet"}};

std::string RefineName(ClusterRefinement r) {
  switch (r) {
    case ClusterRefinement::kNone: return "none";
    case ClusterRefinement::kMean: return "mean";
    case ClusterRefinement::kMeanShift: return "mean_shift";
  }
  return "mean";
}

ClusterRefinement ParseRefine(const std::string& s) {
  if (s == "none") return ClusterRefinement::kNone;
  if (s == "mean") return ClusterRefinement::kMean;
  if (s == "mean_shift") return ClusterRefinement::kMeanShift;
  Fail(ErrorCode::kInvalidParameter, "unknown refinement '" + s + "'");
}

std::string ShapeSourceName(ShapeSource s) {
  switch (s) {
    case ShapeSource::kFileOrEstimate: return "file_or_estimate";
    case ShapeSource::kFileOnly: return "file";
    case ShapeSource::kEstimate: return "estimate";
  }
  return "file_or_estimate";
}

ShapeSource ParseShapeSource(const std::string& s) {
  if (s == "file_or_estimate") return ShapeSource::kFileOrEstimate;
  if (s == "file") return ShapeSource::kFileOnly;
  if (s == "estimate") return ShapeSource::kEstimate;
  Fail(ErrorCode::kInvalidParameter, "unknown shape source '" + s + "'");
}

// Reads the keys of one JSON object section, rejecting unknown ones.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) Fail(ErrorCode::kInvalidParameter, path_ + " must be an object");
  }

  template <typename T>
  void Read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      Fail(ErrorCode::kInvalidParameter, path_ + "." + key + " has the wrong type");
    }
  }
  const json* Child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  void Finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        Fail(ErrorCode::kInvalidParameter, "unknown key " + path_ + "." + item.key());
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void Require(bool ok, const std::string& what) {
  if (!ok) Fail(ErrorCode::kInvalidParameter, "config: " + what);
}

}  // namespace

std::string MethodName(Method method) {
  for (const auto& n : kMethodNames) {
    if (n.method == method) return n.name;
  }
  return "unrectified";
}

Method ParseMethod(const std::string& name) {
  for (const auto& n : kMethodNames) {
    if (name == n.name) return n.method;
  }
  Fail(ErrorCode::kInvalidParameter, "unknown method '" + name + "'");
}

bool MethodNeedsDepth(Method method) {
  return method == Method::kDepthMap || method == Method::kDepthAffnet;
}

bool MethodNeedsShapes(Method method) {
  return method == Method::kAffnetShapes || method == Method::kDenseAffnet ||
         method == Method::kDepthAffnet;
}

void MethodConfig::Validate() const {
  Require(covering.radius > 0.0 && std::isfinite(covering.radius), "covering.radius > 0");
  Require(covering.min_ratio > 0.0 && covering.min_ratio <= 1.0, "covering.min_ratio in (0, 1]");
  Require(clustering.bucket_count >= 1, "clustering.bucket_count >= 1");
  Require(clustering.min_votes_fraction >= 0.0 && clustering.min_votes_fraction <= 1.0,
          "clustering.min_votes_fraction in [0, 1]");
  Require(clustering.min_area_fraction >= 0.0 && clustering.min_area_fraction <= 1.0,
          "clustering.min_area_fraction in [0, 1]");
  Require(shape_cell_size >= 1, "shapes.cell_size >= 1");
  Require(detector.max_keypoints >= 1, "detector.max_keypoints >= 1");
  Require(detector.scales_per_octave >= 1, "detector.scales_per_octave >= 1");
  Require(detector.base_sigma > 0.0, "detector.base_sigma > 0");
  Require(detector.assumed_input_sigma >= 0.0 &&
              detector.assumed_input_sigma < detector.base_sigma,
          "detector.assumed_input_sigma in [0, base_sigma)");
  Require(detector.contrast_threshold >= 0.0, "detector.contrast_threshold >= 0");
  Require(detector.edge_ratio > 1.0, "detector.edge_ratio > 1");
  Require(detector.invalid_margin_px >= 0.0, "detector.invalid_margin_px >= 0");
  Require(detector.min_image_side >= 16, "detector.min_image_side >= 16");
  Require(ratio_threshold > 0.0 && ratio_threshold <= 1.0, "matcher.ratio_threshold in (0, 1]");
  Require(dedupe_radius_px >= 0.0, "matcher.dedupe_radius_px >= 0");
  Require(blur_constant >= 0.0, "warping.blur_constant >= 0");
  Require(max_warp_area_ratio >= 1.0, "warping.max_area_ratio >= 1");
  ransac.Validate();
  Require(rotation_threshold_deg > 0.0, "evaluation.rotation_threshold_deg > 0");
  Require(mae_threshold_px > 0.0, "evaluation.mae_threshold_px > 0");
  for (double t : mae_thresholds) Require(t > 0.0, "evaluation.mae_thresholds > 0");
  Require(plane_dominance_ratio > 0.0, "evaluation.plane_dominance_ratio > 0");
}

bool MethodConfig::operator==(const MethodConfig& o) const {
  return method == o.method && covering == o.covering && clustering == o.clustering &&
         shape_source == o.shape_source && shape_cell_size == o.shape_cell_size &&
         detector == o.detector && ratio_threshold == o.ratio_threshold &&
         dedupe_radius_px == o.dedupe_radius_px && blur_constant == o.blur_constant &&
         max_warp_area_ratio == o.max_warp_area_ratio && ransac == o.ransac &&
         rotation_threshold_deg == o.rotation_threshold_deg &&
         mae_threshold_px == o.mae_threshold_px && mae_thresholds == o.mae_thresholds &&
         plane_dominance_ratio == o.plane_dominance_ratio;
}

json MethodConfigToJson(const MethodConfig& c) {
  const auto& d = c.detector;
  return {
      {"method", MethodName(c.method)},
      {"covering", {{"radius", c.covering.radius}, {"min_ratio", c.covering.min_ratio}}},
      {"clustering",
       {{"bucket_count", c.clustering.bucket_count},
        {"min_votes_fraction", c.clustering.min_votes_fraction},
        {"min_area_fraction", c.clustering.min_area_fraction},
        {"refine", RefineName(c.clustering.refine)},
        {"orthogonalize", c.clustering.orthogonalize}}},
      {"shapes", {{"source", ShapeSourceName(c.shape_source)}, {"cell_size", c.shape_cell_size}}},
      {"detector",
       {{"max_keypoints", d.max_keypoints},
        {"scales_per_octave", d.scales_per_octave},
        {"base_sigma", d.base_sigma},
        {"assumed_input_sigma", d.assumed_input_sigma},
        {"contrast_threshold", d.contrast_threshold},
        {"edge_ratio", d.edge_ratio},
        {"invalid_margin_px", d.invalid_margin_px},
        {"min_image_side", d.min_image_side}}},
      {"matcher", {{"ratio_threshold", c.ratio_threshold}, {"dedupe_radius_px", c.dedupe_radius_px}}},
      {"warping", {{"blur_constant", c.blur_constant}, {"max_area_ratio", c.max_warp_area_ratio}}},
      {"ransac",
       {{"threshold_px", c.ransac.threshold_px},
        {"confidence", c.ransac.confidence},
        {"max_iterations", c.ransac.max_iterations},
        {"seed", c.ransac.seed}}},
      {"evaluation",
       {{"rotation_threshold_deg", c.rotation_threshold_deg},
        {"mae_threshold_px", c.mae_threshold_px},
        {"mae_thresholds", c.mae_thresholds},
        {"plane_dominance_ratio", c.plane_dominance_ratio}}},
  };
}

MethodConfig MethodConfigFromJson(const json& j) {
  MethodConfig c;
  Section root(j, "config");
  std::string method = MethodName(c.method);
  root.Read("method", method);
  c.method = ParseMethod(method);
  if (const json* s = root.Child("covering")) {
    Section sec(*s, "covering");
    sec.Read("radius", c.covering.radius);
    sec.Read("min_ratio", c.covering.min_ratio);
    sec.Finish();
  }
  if (const json* s = root.Child("clustering")) {
    Section sec(*s, "clustering");
    sec.Read("bucket_count", c.clustering.bucket_count);
    sec.Read("min_votes_fraction", c.clustering.min_votes_fraction);
    sec.Read("min_area_fraction", c.clustering.min_area_fraction);
    std::string refine = RefineName(c.clustering.refine);
    sec.Read("refine", refine);
    c.clustering.refine = ParseRefine(refine);
    sec.Read("orthogonalize", c.clustering.orthogonalize);
    sec.Finish();
  }
  if (const json* s = root.Child("shapes")) {
    Section sec(*s, "shapes");
    std::string source = ShapeSourceName(c.shape_source);
    sec.Read("source", source);
    c.shape_source = ParseShapeSource(source);
    sec.Read("cell_size", c.shape_cell_size);
    sec.Finish();
  }
  if (const json* s = root.Child("detector")) {
    Section sec(*s, "detector");
    auto& d = c.detector;
    sec.Read("max_keypoints", d.max_keypoints);
    sec.Read("scales_per_octave", d.scales_per_octave);
    sec.Read("base_sigma", d.base_sigma);
    sec.Read("assumed_input_sigma", d.assumed_input_sigma);
    sec.Read("contrast_threshold", d.contrast_threshold);
    sec.Read("edge_ratio", d.edge_ratio);
    sec.Read("invalid_margin_px", d.invalid_margin_px);
    sec.Read("min_image_side", d.min_image_side);
    sec.Finish();
  }
  if (const json* s = root.Child("matcher")) {
    Section sec(*s, "matcher");
    sec.Read("ratio_threshold", c.ratio_threshold);
    sec.Read("dedupe_radius_px", c.dedupe_radius_px);
    sec.Finish();
  }
  if (const json* s = root.Child("warping")) {
    Section sec(*s, "warping");
    sec.Read("blur_constant", c.blur_constant);
    sec.Read("max_area_ratio", c.max_warp_area_ratio);
    sec.Finish();
  }
  if (const json* s = root.Child("ransac")) {
    Section sec(*s, "ransac");
    sec.Read("threshold_px", c.ransac.threshold_px);
    sec.Read("confidence", c.ransac.confidence);
    sec.Read("max_iterations", c.ransac.max_iterations);
    sec.Read("seed", c.ransac.seed);
    sec.Finish();
  }
  if (const json* s = root.Child("evaluation")) {
    Section sec(*s, "evaluation");
    sec.Read("rotation_threshold_deg", c.rotation_threshold_deg);
    sec.Read("mae_threshold_px", c.mae_threshold_px);
    sec.Read("mae_thresholds", c.mae_thresholds);
    sec.Read("plane_dominance_ratio", c.plane_dominance_ratio);
    sec.Finish();
  }
  root.Finish();
  c.Validate();
  return c;
}

}  // namespace rectmatch
