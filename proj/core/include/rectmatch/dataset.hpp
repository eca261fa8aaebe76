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

#ifndef RECTMATCH_DATASET_HPP_
#define RECTMATCH_DATASET_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "rectmatch/camera.hpp"
#include "rectmatch/method_config.hpp"
#include "rectmatch/pipeline.hpp"
#include "rectmatch/synthetic.hpp"

namespace rectmatch {

enum class CategoryType { kRotation, kCovisibility, kNone };
std::string CategoryTypeName(CategoryType type);

struct CategoryKey {
  CategoryType type = CategoryType::kNone;
  double value = 0.0;
};

// Bin k holds rotations in [10k, 10(k+1)) degrees.
int RotationCategory(double degrees);
// Bin k holds covisibility fractions in [0.1k, 0.1(k+1)).
int CovisibilityCategory(double fraction);

struct Category {
  CategoryType type = CategoryType::kNone;
  int index = 0;

  std::string Label() const;
  bool operator==(const Category&) const = default;
  auto operator<=>(const Category&) const = default;
};

struct ManifestPair {
  std::string id;
  std::string image_a;  // resolved paths
  std::string image_b;
  CameraIntrinsics k_a;
  CameraIntrinsics k_b;
  GroundTruth truth;
  std::optional<std::string> depth_a;
  std::optional<std::string> depth_b;
  std::optional<std::string> shapes_a;
  std::optional<std::string> shapes_b;
  std::optional<CategoryKey> category_key;
};

struct Manifest {
  std::vector<ManifestPair> pairs;
};

// Accepts {"pairs": [...]} or a bare array. Relative paths are resolved
// against `base_dir`. Failures raise ErrorCode::kManifestError with the
// offending pair index and field in the message.
Manifest ParseManifest(const nlohmann::json& j, const std::string& base_dir);
// As above, also reporting line and column for JSON syntax errors.
Manifest LoadManifest(const std::string& path);

// Category of a pair: the declared key, else the ground-truth rotation angle,
// else kNone.
Category CategoryOf(const ManifestPair& pair);

// Loads the image and the auxiliary files of one side ('a' or 'b').
ImageInputs LoadPairInputs(const ManifestPair& pair, char side);

struct PairOutcome {
  PairEvaluation evaluation;
  Category category;
  // Set when a pipeline stage raised; the evaluation is then a failure.
  std::optional<std::string> stage_error;
};

struct DatasetOptions {
  int jobs = 1;
  // Optional per-pair dump hooks. Called from worker threads, so the returned
  // hooks must not share unsynchronised state across pairs.
  std::function<PipelineHooks(const std::string& pair_id)> hooks_for_pair;
};

// Runs every pair of the manifest. Results keep the manifest order.
std::vector<PairOutcome> EvaluateDataset(const Manifest& manifest, const MethodConfig& config,
                                         const DatasetOptions& options = {});

// Writes one synthetic pair (PNG images, DPTH depth with intrinsics
// sidecars, SHPF true shape fields) under `dir` with file names prefixed by
// `id`, and returns its manifest entry with paths relative to `dir`.
nlohmann::json WriteSyntheticPair(const std::string& dir, const std::string& id,
                                  const SyntheticPair& pair);

nlohmann::json MatrixToJson(const Eigen::Matrix3d& m);

}  // namespace rectmatch

#endif  // RECTMATCH_DATASET_HPP_
