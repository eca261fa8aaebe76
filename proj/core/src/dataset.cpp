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

#include "rectmatch/dataset.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "rectmatch/error.hpp"
#include "rectmatch/estimation.hpp"
#include "rectmatch/image.hpp"
#include "rectmatch/shape_field.hpp"

namespace rectmatch {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void ManifestFail(const std::string& where, const std::string& what) {
  Fail(ErrorCode::kManifestError, where + ": " + what);
}

Eigen::Matrix3d Matrix3FromJson(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) ManifestFail(where, "expected a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 3) ManifestFail(where, "expected a 3x3 array");
    for (int c = 0; c < 3; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) ManifestFail(where, "matrix entries must be numbers");
      m(r, c) = v.get<double>();
    }
  }
  if (!m.allFinite()) ManifestFail(where, "matrix entries must be finite");
  return m;
}

Eigen::Vector3d Vector3FromJson(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) ManifestFail(where, "expected an array of 3 numbers");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    const auto& e = j[static_cast<std::size_t>(i)];
    if (!e.is_number()) ManifestFail(where, "expected an array of 3 numbers");
    v[i] = e.get<double>();
  }
  return v;
}

std::string RequireString(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) ManifestFail(where + "." + key, "missing required field");
  const auto& v = obj.at(key);
  if (!v.is_string() || v.get<std::string>().empty()) {
    ManifestFail(where + "." + key, "expected a non-empty string");
  }
  return v.get<std::string>();
}

std::string Resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::optional<std::string> OptionalPath(const nlohmann::json& aux, const char* key,
                                        const std::string& where, const std::string& base_dir) {
  if (!aux.contains(key) || aux.at(key).is_null()) return std::nullopt;
  if (!aux.at(key).is_string()) ManifestFail(where + "." + key, "expected a path string");
  return Resolve(base_dir, aux.at(key).get<std::string>());
}

CameraIntrinsics IntrinsicsField(const nlohmann::json& obj, const char* key,
                                 const std::string& where) {
  if (!obj.contains(key)) ManifestFail(where + "." + key, "missing required field");
  try {
    CameraIntrinsics k = IntrinsicsFromJson(obj.at(key));
    k.Validate();
    return k;
  } catch (const Error& e) {
    ManifestFail(where + "." + key, e.what());
  } catch (const nlohmann::json::exception& e) {
    ManifestFail(where + "." + key, e.what());
  }
}

ManifestPair ParsePair(const nlohmann::json& j, std::size_t index, const std::string& base_dir) {
  const std::string where = "pairs[" + std::to_string(index) + "]";
  if (!j.is_object()) ManifestFail(where, "expected an object");
  ManifestPair pair;
  if (j.contains("id")) {
    if (j.at("id").is_string()) {
      pair.id = j.at("id").get<std::string>();
    } else if (j.at("id").is_number_integer()) {
      pair.id = std::to_string(j.at("id").get<long long>());
    } else {
      ManifestFail(where + ".id", "expected a string");
    }
  } else {
    pair.id = "pair_" + std::to_string(index);
  }
  pair.image_a = Resolve(base_dir, RequireString(j, "image_a", where));
  pair.image_b = Resolve(base_dir, RequireString(j, "image_b", where));
  pair.k_a = IntrinsicsField(j, "K_a", where);
  pair.k_b = IntrinsicsField(j, "K_b", where);

  if (!j.contains("gt") || !j.at("gt").is_object()) {
    ManifestFail(where + ".gt", "missing ground truth object");
  }
  const auto& gt = j.at("gt");
  if (gt.contains("R")) {
    pair.truth.rotation = Matrix3FromJson(gt.at("R"), where + ".gt.R");
    const Eigen::Matrix3d& r = *pair.truth.rotation;
    if ((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() > 1e-6 || r.determinant() <= 0) {
      ManifestFail(where + ".gt.R", "not a rotation matrix");
    }
    if (gt.contains("t")) pair.truth.translation = Vector3FromJson(gt.at("t"), where + ".gt.t");
  }
  if (gt.contains("H")) {
    pair.truth.homography = Matrix3FromJson(gt.at("H"), where + ".gt.H");
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(*pair.truth.homography);
    const auto& s = svd.singularValues();
    if (!(s[2] > 1e-12 * s[0])) ManifestFail(where + ".gt.H", "homography is singular");
  }
  if (!pair.truth.rotation && !pair.truth.homography) {
    ManifestFail(where + ".gt", "needs R (with optional t) or H");
  }

  if (j.contains("aux")) {
    const auto& aux = j.at("aux");
    if (!aux.is_object()) ManifestFail(where + ".aux", "expected an object");
    const std::string w = where + ".aux";
    pair.depth_a = OptionalPath(aux, "depth_a", w, base_dir);
    pair.depth_b = OptionalPath(aux, "depth_b", w, base_dir);
    pair.shapes_a = OptionalPath(aux, "shapes_a", w, base_dir);
    pair.shapes_b = OptionalPath(aux, "shapes_b", w, base_dir);
  }

  if (j.contains("category_key") && !j.at("category_key").is_null()) {
    const auto& ck = j.at("category_key");
    const std::string w = where + ".category_key";
    if (!ck.is_object()) ManifestFail(w, "expected {\"type\", \"value\"}");
    const std::string type = RequireString(ck, "type", w);
    if (!ck.contains("value") || !ck.at("value").is_number()) {
      ManifestFail(w + ".value", "expected a number");
    }
    CategoryKey key;
    key.value = ck.at("value").get<double>();
    if (type == "rotation") {
      key.type = CategoryType::kRotation;
      if (!(key.value >= 0.0 && key.value <= 180.0)) ManifestFail(w + ".value", "rotation outside [0, 180]");
    } else if (type == "covisibility") {
      key.type = CategoryType::kCovisibility;
      if (!(key.value >= 0.0 && key.value <= 1.0)) ManifestFail(w + ".value", "covisibility outside [0, 1]");
    } else {
      ManifestFail(w + ".type", "expected \"rotation\" or \"covisibility\"");
    }
    pair.category_key = key;
  }
  return pair;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> LineColumn(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void WriteJsonFile(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

std::string CategoryTypeName(CategoryType type) {
  switch (type) {
    case CategoryType::kRotation:
      return "rotation";
    case CategoryType::kCovisibility:
      return "covisibility";
    case CategoryType::kNone:
      break;
  }
  return "none";
}

int RotationCategory(double degrees) {
  if (!(degrees >= 0.0)) Fail(ErrorCode::kInvalidParameter, "rotation category of a negative angle");
  return static_cast<int>(std::floor(degrees / 10.0));
}

int CovisibilityCategory(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    Fail(ErrorCode::kInvalidParameter, "covisibility outside [0, 1]");
  }
  // The epsilon keeps exact decimal boundaries such as 0.3 in the upper bin.
  return std::min(9, static_cast<int>(std::floor(fraction * 10.0 + 1e-9)));
}

std::string Category::Label() const {
  switch (type) {
    case CategoryType::kRotation:
      return "rot_" + std::to_string(10 * index) + "_" + std::to_string(10 * (index + 1));
    case CategoryType::kCovisibility: {
      std::ostringstream s;
      s << "covis_" << index / 10 << "." << index % 10 << "_" << (index + 1) / 10 << "."
        << (index + 1) % 10;
      return s.str();
    }
    case CategoryType::kNone:
      break;
  }
  return "all";
}

Manifest ParseManifest(const nlohmann::json& j, const std::string& base_dir) {
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (!j.contains("pairs")) ManifestFail("manifest", "missing \"pairs\" array");
    list = &j.at("pairs");
  }
  if (!list->is_array()) ManifestFail("pairs", "expected an array");
  Manifest manifest;
  for (std::size_t i = 0; i < list->size(); ++i) {
    manifest.pairs.push_back(ParsePair((*list)[i], i, base_dir));
  }
  for (std::size_t i = 0; i < manifest.pairs.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      if (manifest.pairs[i].id == manifest.pairs[k].id) {
        ManifestFail("pairs[" + std::to_string(i) + "].id",
                     "duplicate id \"" + manifest.pairs[i].id + "\"");
      }
    }
  }
  return manifest;
}

Manifest LoadManifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kManifestError, path + ": cannot open manifest");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = LineColumn(text, e.byte == 0 ? 0 : e.byte - 1);
    Fail(ErrorCode::kManifestError, path + ":" + std::to_string(line) + ":" +
                                        std::to_string(col) + ": invalid JSON");
  }
  try {
    return ParseManifest(j, fs::path(path).parent_path().string());
  } catch (const Error& e) {
    Fail(e.code(), path + ": " + e.message());
  }
}

Category CategoryOf(const ManifestPair& pair) {
  Category c;
  if (pair.category_key) {
    c.type = pair.category_key->type;
    c.index = c.type == CategoryType::kRotation ? RotationCategory(pair.category_key->value)
                                                : CovisibilityCategory(pair.category_key->value);
  } else if (pair.truth.rotation) {
    c.type = CategoryType::kRotation;
    c.index = RotationCategory(RotationErrorDeg(*pair.truth.rotation, Eigen::Matrix3d::Identity()));
  }
  return c;
}

ImageInputs LoadPairInputs(const ManifestPair& pair, char side) {
  const bool a = side == 'a';
  ImageInputs in;
  in.image = ReadImage(a ? pair.image_a : pair.image_b);
  in.intrinsics = a ? pair.k_a : pair.k_b;
  const auto& depth = a ? pair.depth_a : pair.depth_b;
  const auto& shapes = a ? pair.shapes_a : pair.shapes_b;
  if (depth) in.depth = LoadDepthMap(*depth);
  if (shapes) in.shapes = LoadShapeField(*shapes);
  return in;
}

std::vector<PairOutcome> EvaluateDataset(const Manifest& manifest, const MethodConfig& config,
                                         const DatasetOptions& options) {
  config.Validate();
  if (options.jobs < 1) Fail(ErrorCode::kInvalidParameter, "jobs must be at least 1");
  std::vector<PairOutcome> outcomes(manifest.pairs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.pairs.size(); i = next++) {
      const ManifestPair& pair = manifest.pairs[i];
      PairOutcome& out = outcomes[i];
      out.category = CategoryOf(pair);
      try {
        const ImageInputs a = LoadPairInputs(pair, 'a');
        const ImageInputs b = LoadPairInputs(pair, 'b');
        PipelineHooks hooks;
        if (options.hooks_for_pair) hooks = options.hooks_for_pair(pair.id);
        out.evaluation = RunPair(pair.id, a, b, pair.truth, config,
                                 options.hooks_for_pair ? &hooks : nullptr);
      } catch (const Error& e) {
        out.evaluation = PairEvaluation{};
        out.evaluation.pair_id = pair.id;
        out.evaluation.method = MethodName(config.method);
        out.evaluation.mode =
            pair.truth.rotation ? EvaluationMode::kRotation : EvaluationMode::kHomography;
        out.evaluation.failure = e.what();
        out.stage_error = e.what();
      }
    }
  };

  const auto workers = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(options.jobs), manifest.pairs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return outcomes;
}

nlohmann::json MatrixToJson(const Eigen::Matrix3d& m) {
  nlohmann::json j = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return j;
}

nlohmann::json WriteSyntheticPair(const std::string& dir, const std::string& id,
                                  const SyntheticPair& pair) {
  const fs::path root(dir);
  fs::create_directories(root);
  const std::string image_a = id + "_a.png";
  const std::string image_b = id + "_b.png";
  const std::string depth_a = id + "_a.dpth";
  const std::string depth_b = id + "_b.dpth";
  const std::string shapes_a = id + "_a.shpf";
  const std::string shapes_b = id + "_b.shpf";
  WritePng((root / image_a).string(), pair.a.image);
  WritePng((root / image_b).string(), pair.b.image);
  SaveDepthMap((root / depth_a).string(), pair.a.depth, pair.intrinsics);
  SaveDepthMap((root / depth_b).string(), pair.b.depth, pair.intrinsics);
  SaveShapeField((root / shapes_a).string(), pair.a.shapes);
  SaveShapeField((root / shapes_b).string(), pair.b.shapes);

  nlohmann::json gt = {{"R", MatrixToJson(pair.rotation)},
                       {"t", {pair.translation.x(), pair.translation.y(), pair.translation.z()}}};
  if (pair.homography) {
    // Plane scenes carry zero parallax; the homography is the usable truth.
    gt = {{"H", MatrixToJson(*pair.homography)}};
  }
  nlohmann::json entry = {
      {"id", id},
      {"image_a", image_a},
      {"image_b", image_b},
      {"K_a", IntrinsicsToJson(pair.intrinsics)},
      {"K_b", IntrinsicsToJson(pair.intrinsics)},
      {"gt", gt},
      {"aux", {{"depth_a", depth_a}, {"depth_b", depth_b}, {"shapes_a", shapes_a}, {"shapes_b", shapes_b}}},
      {"synthetic", SyntheticSpecToJson(pair.spec)}};
  const double angle = RotationErrorDeg(pair.rotation, Eigen::Matrix3d::Identity());
  entry["category_key"] = {{"type", "rotation"}, {"value", angle}};
  WriteJsonFile(root / (id + "_spec.json"), SyntheticSpecToJson(pair.spec));
  return entry;
}

}  // namespace rectmatch
