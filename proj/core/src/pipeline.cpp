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

#include "rectmatch/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "rectmatch/covering.hpp"
#include "rectmatch/depth_planes.hpp"
#include "rectmatch/error.hpp"
#include "rectmatch/estimation.hpp"
#include "rectmatch/geometry.hpp"

namespace rectmatch {
namespace {

using Clock = std::chrono::steady_clock;

// Times `fn` into *slot and prefixes library errors with the stage name.
template <typename Fn>
auto RunStage(const char* stage, double* slot, Fn&& fn) -> decltype(fn()) {
  const auto start = Clock::now();
  struct Accumulate {
    double* slot;
    Clock::time_point start;
    ~Accumulate() {
      if (slot) slot[0] += std::chrono::duration<double>(Clock::now() - start).count();
    }
  } accumulate{slot, start};
  try {
    return fn();
  } catch (const Error& e) {
    const std::string prefix = std::string(stage) + ": ";
    if (e.message().rfind(prefix, 0) == 0) throw;
    throw Error(e.code(), prefix + e.message());
  }
}

class Rectifier {
 public:
  Rectifier(const ImageInputs& input, const MethodConfig& config, StageTimings* timings,
            const PipelineHooks* hooks, char tag)
      : input_(input), config_(config), timings_(timings ? timings : &local_), hooks_(hooks),
        tag_(tag) {}

  ImageRectification Run() {
    const Image& image = input_.image;
    const int w = image.width();
    const int h = image.height();

    WarpRecord identity;
    identity.warped_width = w;
    identity.warped_height = h;
    identity.source_mask = SegmentMask::Full(w, h);
    out_.records.push_back(identity);
    out_.record_component.push_back(0);
    out_.warp_valid.push_back(SegmentMask::Full(w, h));

    sets_.push_back(RunStage("detection", &timings_->detection, [&] {
      return DetectAndDescribe(image, nullptr, config_.detector);
    }));
    for (auto& kp : sets_.front().keypoints) kp.provenance = kOriginalProvenance;

    switch (config_.method) {
      case Method::kUnrectified:
        break;
      case Method::kAffnetShapes:
        RunAffnetShapes();
        break;
      case Method::kDepthMap:
        RunDepthMap();
        break;
      case Method::kDenseAffnet:
        RunDenseAffnet();
        break;
      case Method::kDepthAffnet:
        RunDepthAffnet();
        break;
    }

    out_.features = RunStage("detection", &timings_->detection, [&] {
      return MergeFeatures(sets_, config_.dedupe_radius_px);
    });
    std::vector<int> components(out_.record_component);
    std::sort(components.begin(), components.end());
    out_.component_count = static_cast<std::size_t>(
        std::unique(components.begin(), components.end()) - components.begin());
    return std::move(out_);
  }

 private:
  const DenseShapeField& Shapes() {
    if (shapes_) return *shapes_;
    RunStage("segmentation", &timings_->segmentation, [&] {
      const bool have_file = input_.shapes.has_value();
      if (config_.shape_source == ShapeSource::kFileOnly && !have_file) {
        Fail(ErrorCode::kMissingAuxInput, "method needs a shape field file");
      }
      if (have_file && config_.shape_source != ShapeSource::kEstimate) {
        const DenseShapeField& f = *input_.shapes;
        if (f.image_width() != input_.image.width() || f.image_height() != input_.image.height()) {
          Fail(ErrorCode::kDimensionMismatch, "shape field does not match the image size");
        }
        shapes_ = f;
      } else {
        shapes_ = EstimateShapeFieldStructureTensor(input_.image, config_.shape_cell_size);
      }
      return 0;
    });
    return *shapes_;
  }

  const PlaneSegmentation& Segmentation() {
    if (segmentation_) return *segmentation_;
    RunStage("segmentation", &timings_->segmentation, [&] {
      if (!input_.depth) Fail(ErrorCode::kMissingAuxInput, "method needs a depth map");
      const DepthMap& depth = *input_.depth;
      if (depth.width != input_.image.width() || depth.height != input_.image.height()) {
        Fail(ErrorCode::kDimensionMismatch, "depth map does not match the image size");
      }
      const NormalMap normals = NormalsFromDepth(depth, input_.intrinsics);
      const auto buckets = SphereBuckets(config_.clustering.bucket_count);
      const int min_votes = std::max(
          1, static_cast<int>(std::ceil(config_.clustering.min_votes_fraction *
                                        static_cast<double>(normals.ValidCount()))));
      clusters_ = ClusterNormals(normals, buckets, min_votes, config_.clustering.refine);
      if (config_.clustering.orthogonalize && clusters_.size() > 1) {
        // Orthogonality is only defined for up to three planes; further
        // clusters keep their own normals.
        const std::size_t n = std::min<std::size_t>(3, clusters_.size());
        const auto fixed = OrthogonalizeClusters(std::span(clusters_).first(n));
        std::copy(fixed.begin(), fixed.end(), clusters_.begin());
      }
      const double area = static_cast<double>(input_.image.width()) * input_.image.height();
      const auto min_area =
          static_cast<std::size_t>(std::ceil(config_.clustering.min_area_fraction * area));
      segmentation_ = SegmentClusters(normals, clusters_, min_area,
                                      BucketAssignmentRadius(buckets.size()));
      return 0;
    });
    return *segmentation_;
  }

  int NewComponent() { return next_component_++; }

  // Warps, detects and backprojects. Returns false when the warp was
  // rejected.
  template <typename Map>
  bool AddWarp(const SegmentMask& mask, const Map& map, int component) {
    WarpOptions options;
    options.blur_constant = config_.blur_constant;
    options.max_area_ratio = config_.max_warp_area_ratio;
    std::optional<WarpResult> warp;
    try {
      warp = RunStage("warping", &timings_->warping,
                      [&] { return WarpMasked(input_.image, mask, map, options); });
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOversizeWarp) throw;
      out_.skipped.push_back(e.what());
      return false;
    }
    const std::size_t index = out_.records.size();
    if (hooks_ && hooks_->on_warp) hooks_->on_warp(tag_, index, *warp);

    FeatureSet features = RunStage("detection", &timings_->detection, [&] {
      FeatureSet fs;
      if (std::min(warp->image.width(), warp->image.height()) < config_.detector.min_image_side) {
        return fs;  // too small to hold a detection
      }
      fs = DetectAndDescribe(warp->image, &warp->valid, config_.detector);
      std::vector<Eigen::Vector2d> positions;
      positions.reserve(fs.size());
      for (const auto& kp : fs.keypoints) positions.push_back(kp.position);
      const auto back = BackprojectPoints(positions, warp->record);
      const double w = input_.image.width();
      const double h = input_.image.height();
      FeatureSet kept;
      std::vector<Eigen::Index> cols;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        const Eigen::Vector2d& p = back[i];
        if (p.x() < -0.5 || p.y() < -0.5 || p.x() > w - 0.5 || p.y() > h - 0.5) continue;
        Keypoint kp = fs.keypoints[i];
        kp.position = p;
        kp.provenance = static_cast<int>(index);
        kept.keypoints.push_back(kp);
        cols.push_back(static_cast<Eigen::Index>(i));
      }
      kept.descriptors.resize(kDescriptorSize, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        kept.descriptors.col(static_cast<Eigen::Index>(c)) = fs.descriptors.col(cols[c]);
      }
      return kept;
    });
    out_.records.push_back(std::move(warp->record));
    out_.record_component.push_back(component);
    out_.warp_valid.push_back(std::move(warp->valid));
    sets_.push_back(std::move(features));
    return true;
  }

  // Greedy covering of the shapes sampled at original keypoints inside
  // `region` (null: whole image); one map per selected non-identity ball.
  std::vector<TiltPoint> CoverSparseShapes(const SegmentMask* region, const char* label) {
    const DenseShapeField& field = Shapes();
    return RunStage("covering", &timings_->covering, [&] {
      std::vector<Eigen::Vector2d> positions;
      for (const auto& kp : sets_.front().keypoints) {
        const int x = std::clamp(static_cast<int>(std::lround(kp.position.x())), 0,
                                 input_.image.width() - 1);
        const int y = std::clamp(static_cast<int>(std::lround(kp.position.y())), 0,
                                 input_.image.height() - 1);
        if (region && !region->Test(x, y)) continue;
        positions.push_back(kp.position);
      }
      std::vector<TiltPoint> centers;
      if (positions.empty()) return centers;
      const SparseShapes sparse = SampleSparseShapes(field, positions);
      ShapeSet set;
      for (const auto& entry : sparse.entries) set.points.push_back(TiltCoords(entry.shape));
      const Covering cover = GreedyCover(set, config_.covering.radius, config_.covering.min_ratio);
      nlohmann::json j = CoveringToJson(cover);
      j["scope"] = label;
      j["shape_count"] = set.points.size();
      out_.covering.push_back(j);
      if (hooks_ && hooks_->on_covering) hooks_->on_covering(tag_, j);
      for (const auto& ball : cover.balls) {
        if (!ball.center.IsOrigin()) centers.push_back(ball.center);
      }
      return centers;
    });
  }

  void RunAffnetShapes() {
    const SegmentMask full = SegmentMask::Full(input_.image.width(), input_.image.height());
    for (const TiltPoint& c : CoverSparseShapes(nullptr, "image")) {
      AddWarp(full, AffineMap(AreaPreservingLinear(c)), 0);
    }
  }

  void RunDenseAffnet() {
    const DenseShapeField& field = Shapes();
    const auto [covering, masks] = RunStage("covering", &timings_->covering, [&] {
      const auto points = FieldToTiltPoints(field);
      ShapeSet set;
      set.points.reserve(points.size());
      for (const auto& p : points) set.points.push_back(p.point);
      Covering cover = GreedyCover(set, config_.covering.radius, config_.covering.min_ratio);
      const auto labels = AssignMasks(points, cover);
      LabelMasks masks = MasksFromLabels(field, labels, cover.balls.size());
      return std::make_pair(std::move(cover), std::move(masks));
    });
    nlohmann::json j = CoveringToJson(covering);
    j["scope"] = "dense_field";
    j["shape_count"] = field.cell_count();
    out_.covering.push_back(j);
    if (hooks_ && hooks_->on_covering) hooks_->on_covering(tag_, j);
    for (std::size_t b = 0; b < covering.balls.size(); ++b) {
      const TiltPoint& c = covering.balls[b].center;
      const SegmentMask& mask = masks.per_label[b];
      // The identity region is served by the original-image features.
      if (c.IsOrigin() || mask.Area() == 0) continue;
      const int component = next_component_;
      if (AddWarp(mask, AffineMap(AreaPreservingLinear(c)), component)) NewComponent();
    }
  }

  void RunDepthMap() {
    const PlaneSegmentation& seg = Segmentation();
    for (const SegmentMask& segment : seg.segments) {
      const Eigen::Matrix3d h = RunStage("segmentation", &timings_->segmentation, [&] {
        const Eigen::Vector3d& normal =
            clusters_[static_cast<std::size_t>(*segment.cluster_id)].mean_normal;
        if (!(normal.z() < 0.0)) return Eigen::Matrix3d(Eigen::Matrix3d::Identity());
        return FrontoParallelHomography(normal, input_.intrinsics, Centroid(segment));
      });
      if (h == Eigen::Matrix3d::Identity()) continue;
      const int component = next_component_;
      if (AddWarp(segment, h, component)) NewComponent();
    }
  }

  void RunDepthAffnet() {
    const PlaneSegmentation& seg = Segmentation();
    for (std::size_t s = 0; s < seg.segments.size(); ++s) {
      const SegmentMask& segment = seg.segments[s];
      const std::string label = "segment_" + std::to_string(s);
      const int component = next_component_;
      bool used = false;
      for (const TiltPoint& c : CoverSparseShapes(&segment, label.c_str())) {
        used = AddWarp(segment, AffineMap(AreaPreservingLinear(c)), component) || used;
      }
      if (used) NewComponent();
    }
  }

  static Eigen::Vector2d Centroid(const SegmentMask& mask) {
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    double n = 0.0;
    for (int y = 0; y < mask.height; ++y) {
      for (int x = 0; x < mask.width; ++x) {
        if (mask.Test(x, y)) {
          sum += Eigen::Vector2d(x, y);
          n += 1.0;
        }
      }
    }
    return n > 0.0 ? Eigen::Vector2d(sum / n) : sum;
  }

  const ImageInputs& input_;
  const MethodConfig& config_;
  StageTimings local_;
  StageTimings* timings_;
  const PipelineHooks* hooks_;
  char tag_;
  ImageRectification out_;
  std::vector<FeatureSet> sets_;
  std::optional<DenseShapeField> shapes_;
  std::optional<PlaneSegmentation> segmentation_;
  std::vector<PlaneCluster> clusters_;
  int next_component_ = 1;
};

std::optional<double> OptionalFromJson(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string EvaluationModeName(EvaluationMode mode) {
  return mode == EvaluationMode::kRotation ? "rotation" : "homography";
}

bool PairEvaluation::SameResult(const PairEvaluation& o) const {
  return pair_id == o.pair_id && mode == o.mode && rotation_error_deg == o.rotation_error_deg &&
         mae_px == o.mae_px && accurate == o.accurate && failure == o.failure &&
         estimate == o.estimate && match_count == o.match_count &&
         inlier_count == o.inlier_count && stats == o.stats;
}

ImageRectification RectifyImage(const ImageInputs& input, const MethodConfig& config,
                                StageTimings* timings, const PipelineHooks* hooks, char tag) {
  config.Validate();
  if (input.image.empty()) Fail(ErrorCode::kInvalidParameter, "empty input image");
  return Rectifier(input, config, timings, hooks, tag).Run();
}

RunStats ComputeRunStats(const ImageRectification& a, const ImageRectification& b) {
  RunStats stats;
  std::size_t records = 0;
  for (const ImageRectification* r : {&a, &b}) {
    for (const auto& record : r->records) stats.total_warp_area_px += static_cast<double>(record.Area());
    records += r->records.size();
    stats.keypoint_count += r->features.size();
    stats.component_count += r->component_count;
  }
  stats.rectifications_per_component =
      stats.component_count ? static_cast<double>(records) / static_cast<double>(stats.component_count)
                            : 0.0;
  return stats;
}

PairEvaluation RunPair(const std::string& pair_id, const ImageInputs& a, const ImageInputs& b,
                       const GroundTruth& truth, const MethodConfig& config,
                       const PipelineHooks* hooks, PairArtifacts* artifacts) {
  config.Validate();
  if (!truth.rotation && !truth.homography) {
    Fail(ErrorCode::kInvalidParameter, "ground truth needs a rotation or a homography");
  }
  PairEvaluation eval;
  eval.pair_id = pair_id;
  eval.method = MethodName(config.method);

  ImageRectification ra = RectifyImage(a, config, &eval.timings, hooks, 'a');
  ImageRectification rb = RectifyImage(b, config, &eval.timings, hooks, 'b');
  eval.stats = ComputeRunStats(ra, rb);

  std::vector<Match> matches = RunStage("matching", &eval.timings.matching, [&] {
    return MatchDescriptors(ra.features.descriptors, rb.features.descriptors,
                            config.ratio_threshold);
  });
  eval.match_count = static_cast<int>(matches.size());
  std::vector<Eigen::Vector2d> pa;
  std::vector<Eigen::Vector2d> pb;
  pa.reserve(matches.size());
  pb.reserve(matches.size());
  for (const auto& m : matches) {
    pa.push_back(ra.features.keypoints[static_cast<std::size_t>(m.index_a)].position);
    pb.push_back(rb.features.keypoints[static_cast<std::size_t>(m.index_b)].position);
  }

  RunStage("estimation", &eval.timings.estimation, [&] {
    auto try_homography = [&]() -> std::optional<HomographyEstimate> {
      try {
        return EstimateHomography(pa, pb, config.ransac);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientMatches &&
            e.code() != ErrorCode::kDegenerateConfiguration) {
          throw;
        }
        eval.failure = std::string("homography: ") + e.what();
        return std::nullopt;
      }
    };
    auto score_homography = [&](const std::optional<HomographyEstimate>& hom) {
      eval.mode = EvaluationMode::kHomography;
      if (!hom) return;
      eval.failure.clear();
      eval.estimate = hom->homography;
      eval.inlier_count = hom->inlier_count;
      eval.mae_px = MaeReprojection(hom->homography, *truth.homography, a.image.width(),
                                    a.image.height(), b.image.width(), b.image.height());
      eval.accurate = *eval.mae_px < config.mae_threshold_px;
    };

    if (!truth.rotation) {
      score_homography(try_homography());
      return 0;
    }
    eval.mode = EvaluationMode::kRotation;
    std::optional<PoseEstimate> pose;
    try {
      pose = EstimateEssential(pa, pb, a.intrinsics, b.intrinsics, config.ransac);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientMatches &&
          e.code() != ErrorCode::kDegenerateConfiguration) {
        throw;
      }
      eval.failure = std::string("essential: ") + e.what();
    }
    bool plane_dominated = !pose.has_value();
    std::optional<HomographyEstimate> hom;
    if (pose && pa.size() >= 4) {
      hom = try_homography();
      eval.failure.clear();
      plane_dominated = hom && hom->inlier_count >= config.plane_dominance_ratio * pose->inlier_count;
    }
    if (plane_dominated) {
      if (truth.homography) {
        score_homography(hom ? hom : try_homography());
      } else if (pose) {
        eval.failure = "plane-dominated pair without homography ground truth";
        eval.inlier_count = pose->inlier_count;
      }
      return 0;
    }
    eval.estimate = pose->rotation;
    eval.inlier_count = pose->inlier_count;
    eval.rotation_error_deg = RotationErrorDeg(pose->rotation, *truth.rotation);
    eval.accurate = *eval.rotation_error_deg < config.rotation_threshold_deg;
    return 0;
  });

  if (artifacts) {
    artifacts->a = std::move(ra);
    artifacts->b = std::move(rb);
    artifacts->matches = std::move(matches);
  }
  return eval;
}

nlohmann::json PairEvaluationToJson(const PairEvaluation& e) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json estimate = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    estimate.push_back({e.estimate(r, 0), e.estimate(r, 1), e.estimate(r, 2)});
  }
  return {{"pair_id", e.pair_id},
          {"method", e.method},
          {"mode", EvaluationModeName(e.mode)},
          {"rotation_error_deg", opt(e.rotation_error_deg)},
          {"mae_px", opt(e.mae_px)},
          {"accurate", e.accurate},
          {"failure", e.failure},
          {"estimate", estimate},
          {"match_count", e.match_count},
          {"inlier_count", e.inlier_count},
          {"stats",
           {{"total_warp_area_px", e.stats.total_warp_area_px},
            {"keypoint_count", e.stats.keypoint_count},
            {"component_count", e.stats.component_count},
            {"rectifications_per_component", e.stats.rectifications_per_component}}},
          {"timings",
           {{"segmentation", e.timings.segmentation},
            {"covering", e.timings.covering},
            {"warping", e.timings.warping},
            {"detection", e.timings.detection},
            {"matching", e.timings.matching},
            {"estimation", e.timings.estimation}}}};
}

PairEvaluation PairEvaluationFromJson(const nlohmann::json& j) {
  PairEvaluation e;
  try {
    e.pair_id = j.at("pair_id").get<std::string>();
    e.method = j.at("method").get<std::string>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "rotation" && mode != "homography") {
      Fail(ErrorCode::kFormatError, "unknown evaluation mode " + mode);
    }
    e.mode = mode == "rotation" ? EvaluationMode::kRotation : EvaluationMode::kHomography;
    e.rotation_error_deg = OptionalFromJson(j, "rotation_error_deg");
    e.mae_px = OptionalFromJson(j, "mae_px");
    e.accurate = j.at("accurate").get<bool>();
    e.failure = j.at("failure").get<std::string>();
    const auto& m = j.at("estimate");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) e.estimate(r, c) = m.at(r).at(c).get<double>();
    }
    e.match_count = j.at("match_count").get<int>();
    e.inlier_count = j.at("inlier_count").get<int>();
    const auto& s = j.at("stats");
    e.stats.total_warp_area_px = s.at("total_warp_area_px").get<double>();
    e.stats.keypoint_count = s.at("keypoint_count").get<std::size_t>();
    e.stats.component_count = s.at("component_count").get<std::size_t>();
    e.stats.rectifications_per_component = s.at("rectifications_per_component").get<double>();
    const auto& t = j.at("timings");
    e.timings.segmentation = t.at("segmentation").get<double>();
    e.timings.covering = t.at("covering").get<double>();
    e.timings.warping = t.at("warping").get<double>();
    e.timings.detection = t.at("detection").get<double>();
    e.timings.matching = t.at("matching").get<double>();
    e.timings.estimation = t.at("estimation").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    Fail(ErrorCode::kFormatError, std::string("pair evaluation: ") + ex.what());
  }
  return e;
}

}  // namespace rectmatch
