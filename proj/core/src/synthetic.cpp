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

#include "rectmatch/synthetic.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "rectmatch/depth_planes.hpp"
#include "rectmatch/error.hpp"

namespace rectmatch {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr int kMaxSupersample = 8;

// Uniform double in [0, 1) from the top 53 bits, independent of the
// standard library's distribution implementations.
double Uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double Smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double PositiveMod(double x, double m) {
  const double r = std::fmod(x, m);
  return r < 0.0 ? r + m : r;
}

float SamplePeriodic(const Image& tex, double x, double y) {
  const int n = tex.width();
  x = PositiveMod(x, n);
  y = PositiveMod(y, n);
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = (x0 + 1) % n;
  const int y1 = (y0 + 1) % n;
  const double top = (1.0 - fx) * tex.at(x0 % n, y0 % n) + fx * tex.at(x1, y0 % n);
  const double bottom = (1.0 - fx) * tex.at(x0 % n, y1) + fx * tex.at(x1, y1);
  return static_cast<float>((1.0 - fy) * top + fy * bottom);
}

struct Camera {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> camera
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
};

Camera LookAt(const Eigen::Vector3d& center, const Eigen::Vector3d& target, double roll_rad) {
  const Eigen::Vector3d z = (target - center).normalized();
  Eigen::Vector3d down(0.0, 1.0, 0.0);
  Eigen::Vector3d x = down.cross(z);
  if (x.norm() < 1e-9) x = Eigen::Vector3d::UnitX();
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  Camera cam;
  cam.rotation.row(0) = x.transpose();
  cam.rotation.row(1) = y.transpose();
  cam.rotation.row(2) = z.transpose();
  cam.rotation = Eigen::AngleAxisd(roll_rad, Eigen::Vector3d::UnitZ()).toRotationMatrix() *
                 cam.rotation;
  cam.center = center;
  return cam;
}

struct Hit {
  int plane = -1;
  double lambda = 0.0;
};

Hit CastRay(const std::vector<SyntheticPlane>& planes, const Eigen::Vector3d& origin,
            const Eigen::Vector3d& dir) {
  Hit best;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const double denom = planes[i].normal.dot(dir);
    if (!(denom < 0.0)) continue;
    const double lambda = (planes[i].offset - planes[i].normal.dot(origin)) / denom;
    if (lambda > 0.0 && (best.plane < 0 || lambda < best.lambda)) {
      best.plane = static_cast<int>(i);
      best.lambda = lambda;
    }
  }
  return best;
}

Eigen::Vector2d TexelOf(const SyntheticPlane& plane, const Eigen::Vector3d& x) {
  const Eigen::Vector3d d = x - plane.origin;
  return Eigen::Vector2d(d.dot(plane.axis_u), d.dot(plane.axis_v)) * plane.texels_per_unit +
         plane.texel_offset;
}

class Renderer {
 public:
  Renderer(const std::vector<SyntheticPlane>& planes, const Image& texture,
           const CameraIntrinsics& k, const Camera& cam)
      : planes_(planes), texture_(texture), cam_(cam), k_inv_(k.KInverse()) {}

  Eigen::Vector3d Ray(double u, double v) const {
    return cam_.rotation.transpose() * (k_inv_ * Eigen::Vector3d(u, v, 1.0));
  }

  Hit Cast(double u, double v) const { return CastRay(planes_, cam_.center, Ray(u, v)); }

  // Texel coordinates of pixel (u, v) on a given plane (no visibility test).
  Eigen::Vector2d TexelOnPlane(int plane, double u, double v) const {
    const SyntheticPlane& p = planes_[static_cast<std::size_t>(plane)];
    const Eigen::Vector3d dir = Ray(u, v);
    const double lambda = (p.offset - p.normal.dot(cam_.center)) / p.normal.dot(dir);
    return TexelOf(p, cam_.center + lambda * dir);
  }

  Eigen::Matrix2d Jacobian(int plane, double u, double v) const {
    Eigen::Matrix2d j;
    j.col(0) = TexelOnPlane(plane, u + 0.5, v) - TexelOnPlane(plane, u - 0.5, v);
    j.col(1) = TexelOnPlane(plane, u, v + 0.5) - TexelOnPlane(plane, u, v - 0.5);
    return j;
  }

  float Shade(double u, double v) const {
    const Hit hit = Cast(u, v);
    if (hit.plane < 0) return 0.0f;
    const SyntheticPlane& p = planes_[static_cast<std::size_t>(hit.plane)];
    const Eigen::Vector2d t = TexelOf(p, cam_.center + hit.lambda * Ray(u, v));
    return SamplePeriodic(texture_, t.x(), t.y());
  }

  SyntheticView Render(int width, int height, int cell_size) const {
    SyntheticView view;
    view.image = Image(width, height, 0.0f);
    view.depth = DepthMap(width, height, 0.0f);
    view.plane_labels.assign(static_cast<std::size_t>(width) * height, -1);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const Hit hit = Cast(x, y);
        if (hit.plane < 0) continue;
        const Eigen::Vector3d point = cam_.center + hit.lambda * Ray(x, y);
        view.depth.at(x, y) = static_cast<float>((cam_.rotation * (point - cam_.center)).z());
        view.plane_labels[static_cast<std::size_t>(y) * width + x] = hit.plane;
        // Box-filter the pixel footprint with as many samples per axis as
        // texels it spans.
        const Eigen::Matrix2d j = Jacobian(hit.plane, x, y);
        const int nu = std::clamp(static_cast<int>(std::ceil(j.col(0).norm())), 1, kMaxSupersample);
        const int nv = std::clamp(static_cast<int>(std::ceil(j.col(1).norm())), 1, kMaxSupersample);
        double sum = 0.0;
        for (int iv = 0; iv < nv; ++iv) {
          for (int iu = 0; iu < nu; ++iu) {
            sum += Shade(x + (iu + 0.5) / nu - 0.5, y + (iv + 0.5) / nv - 0.5);
          }
        }
        view.image.at(x, y) = static_cast<float>(sum / (nu * nv));
      }
    }

    const int wc = (width + cell_size - 1) / cell_size;
    const int hc = (height + cell_size - 1) / cell_size;
    std::vector<Eigen::Matrix2d> shapes(static_cast<std::size_t>(wc) * hc,
                                        Eigen::Matrix2d::Identity());
    for (int cy = 0; cy < hc; ++cy) {
      for (int cx = 0; cx < wc; ++cx) {
        const double u = std::min((cx + 0.5) * cell_size - 0.5, width - 1.0);
        const double v = std::min((cy + 0.5) * cell_size - 0.5, height - 1.0);
        const Hit hit = Cast(u, v);
        if (hit.plane < 0) continue;
        Eigen::Matrix2d j = Jacobian(hit.plane, u, v);
        if (j.determinant() < 0.0) j.row(1) *= -1.0;
        const double det = j.determinant();
        if (!(det > 0.0) || !j.allFinite()) continue;
        shapes[static_cast<std::size_t>(cy) * wc + cx] = j / std::sqrt(det);
      }
    }
    view.shapes = DenseShapeField(width, height, cell_size, std::move(shapes));
    return view;
  }

 private:
  const std::vector<SyntheticPlane>& planes_;
  const Image& texture_;
  Camera cam_;
  Eigen::Matrix3d k_inv_;
};

SyntheticPlane MakePlane(const Eigen::Vector3d& normal, const Eigen::Vector3d& through,
                         const Eigen::Vector3d& axis_hint, double density,
                         const Eigen::Vector2d& texel_offset) {
  SyntheticPlane p;
  p.normal = normal.normalized();
  p.offset = p.normal.dot(through);
  p.origin = through;
  p.axis_u = (axis_hint - axis_hint.dot(p.normal) * p.normal).normalized();
  p.axis_v = p.normal.cross(p.axis_u);
  p.texels_per_unit = density;
  p.texel_offset = texel_offset;
  return p;
}

void CheckSpec(const SyntheticSpec& spec) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) Fail(ErrorCode::kInvalidSpec, "synthetic spec: " + what);
  };
  require(spec.width >= 32 && spec.height >= 32, "image sides must be >= 32");
  require(spec.width <= 8192 && spec.height <= 8192, "image sides must be <= 8192");
  require(spec.focal_px > 0.0 && std::isfinite(spec.focal_px), "focal_px must be positive");
  require(spec.tilt >= 1.0 && std::isfinite(spec.tilt), "tilt must be >= 1");
  require(std::abs(spec.yaw_deg) < 90.0 && std::abs(spec.pitch_deg) < 90.0,
          "yaw and pitch must lie in (-90, 90)");
  require(std::isfinite(spec.roll_deg), "roll must be finite");
  require(spec.shape_cell_size >= 1, "shape_cell_size must be >= 1");
  require(spec.texture_size >= 64 && spec.texture_size <= 8192, "texture_size in [64, 8192]");
}

}  // namespace

std::string SceneTypeName(SceneType scene) {
  switch (scene) {
    case SceneType::kSinglePlane: return "single_plane";
    case SceneType::kTwoPlanes: return "two_planes";
    case SceneType::kCubeCorner: return "cube_corner";
  }
  return "single_plane";
}

SceneType ParseSceneType(const std::string& name) {
  if (name == "single_plane") return SceneType::kSinglePlane;
  if (name == "two_planes") return SceneType::kTwoPlanes;
  if (name == "cube_corner") return SceneType::kCubeCorner;
  Fail(ErrorCode::kInvalidSpec, "unknown scene type '" + name + "'");
}

nlohmann::json SyntheticSpecToJson(const SyntheticSpec& s) {
  return {{"scene", SceneTypeName(s.scene)},
          {"seed", s.texture_seed},
          {"width", s.width},
          {"height", s.height},
          {"focal_px", s.focal_px},
          {"tilt", s.tilt},
          {"roll_deg", s.roll_deg},
          {"yaw_deg", s.yaw_deg},
          {"pitch_deg", s.pitch_deg},
          {"shape_cell_size", s.shape_cell_size},
          {"texture_size", s.texture_size}};
}

SyntheticSpec SyntheticSpecFromJson(const nlohmann::json& j) {
  if (!j.is_object()) Fail(ErrorCode::kInvalidSpec, "synthetic spec must be a JSON object");
  static const std::set<std::string> kKeys = {"scene", "seed", "width", "height",
                                              "focal_px", "tilt", "roll_deg", "yaw_deg",
                                              "pitch_deg", "shape_cell_size", "texture_size"};
  for (const auto& item : j.items()) {
    if (!kKeys.count(item.key())) Fail(ErrorCode::kInvalidSpec, "unknown spec key " + item.key());
  }
  SyntheticSpec s;
  try {
    if (j.contains("scene")) s.scene = ParseSceneType(j.at("scene").get<std::string>());
    if (j.contains("seed")) s.texture_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("width")) s.width = j.at("width").get<int>();
    if (j.contains("height")) s.height = j.at("height").get<int>();
    if (j.contains("focal_px")) s.focal_px = j.at("focal_px").get<double>();
    if (j.contains("tilt")) s.tilt = j.at("tilt").get<double>();
    if (j.contains("roll_deg")) s.roll_deg = j.at("roll_deg").get<double>();
    if (j.contains("yaw_deg")) s.yaw_deg = j.at("yaw_deg").get<double>();
    if (j.contains("pitch_deg")) s.pitch_deg = j.at("pitch_deg").get<double>();
    if (j.contains("shape_cell_size")) s.shape_cell_size = j.at("shape_cell_size").get<int>();
    if (j.contains("texture_size")) s.texture_size = j.at("texture_size").get<int>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidSpec, std::string("synthetic spec: ") + e.what());
  }
  CheckSpec(s);
  return s;
}

Image ProceduralTexture(int size, std::uint64_t seed) {
  if (size < 8) Fail(ErrorCode::kInvalidParameter, "texture too small");
  std::mt19937_64 rng(seed);
  std::vector<double> acc(static_cast<std::size_t>(size) * size, 0.0);
  for (int scale = 2; scale <= 128 && scale <= size / 2; scale *= 2) {
    const int n = std::max(1, size / scale);
    const double step = static_cast<double>(size) / n;
    std::vector<double> lattice(static_cast<std::size_t>(n) * n);
    for (double& v : lattice) v = 2.0 * Uniform01(rng) - 1.0;
    const double amplitude = std::pow(static_cast<double>(scale), 0.3);
    for (int y = 0; y < size; ++y) {
      const double gy = y / step;
      const int y0 = static_cast<int>(gy) % n;
      const int y1 = (y0 + 1) % n;
      const double ty = Smoothstep(gy - std::floor(gy));
      for (int x = 0; x < size; ++x) {
        const double gx = x / step;
        const int x0 = static_cast<int>(gx) % n;
        const int x1 = (x0 + 1) % n;
        const double tx = Smoothstep(gx - std::floor(gx));
        const auto at = [&](int xx, int yy) {
          return lattice[static_cast<std::size_t>(yy) * n + xx];
        };
        const double top = (1.0 - tx) * at(x0, y0) + tx * at(x1, y0);
        const double bottom = (1.0 - tx) * at(x0, y1) + tx * at(x1, y1);
        acc[static_cast<std::size_t>(y) * size + x] += amplitude * ((1.0 - ty) * top + ty * bottom);
      }
    }
  }
  double mean = 0.0;
  for (double v : acc) mean += v;
  mean /= static_cast<double>(acc.size());
  double var = 0.0;
  for (double v : acc) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(acc.size()));
  Image tex(size, size);
  auto px = tex.pixels();
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double v = 0.5 + 0.2 * (acc[i] - mean) / (stddev > 0.0 ? stddev : 1.0);
    px[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return tex;
}

SyntheticPair GenerateSyntheticPair(const SyntheticSpec& spec) {
  CheckSpec(spec);
  SyntheticPair pair;
  pair.spec = spec;
  pair.intrinsics = {spec.focal_px, spec.focal_px, 0.5 * (spec.width - 1), 0.5 * (spec.height - 1)};

  std::mt19937_64 rng(spec.texture_seed ^ 0x5DEECE66DULL);
  const double tex = spec.texture_size;
  auto offset = [&]() { return Eigen::Vector2d(Uniform01(rng) * tex, Uniform01(rng) * tex); };

  Eigen::Vector3d target;
  Camera cam_b;
  switch (spec.scene) {
    case SceneType::kSinglePlane: {
      const double distance = spec.focal_px;  // one texel per pixel in view a
      target = Eigen::Vector3d(0.0, 0.0, distance);
      pair.planes.push_back(MakePlane(Eigen::Vector3d(0.0, 0.0, -1.0), target,
                                      Eigen::Vector3d::UnitX(), 1.0, offset()));
      const double yaw = std::acos(1.0 / spec.tilt);
      const Eigen::Vector3d center =
          target + Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix() * (-target);
      cam_b = LookAt(center, target, spec.roll_deg * kDegToRad);
      if (spec.tilt == 1.0 && spec.roll_deg == 0.0) cam_b = Camera{};
      break;
    }
    case SceneType::kTwoPlanes:
    case SceneType::kCubeCorner: {
      const double distance = 5.0;
      const double density = spec.focal_px / distance;
      target = Eigen::Vector3d(0.0, 0.0, distance);
      if (spec.scene == SceneType::kTwoPlanes) {
        const double a = 35.0 * kDegToRad;
        pair.planes.push_back(MakePlane(Eigen::Vector3d(std::sin(a), 0.0, -std::cos(a)), target,
                                        Eigen::Vector3d::UnitY(), density, offset()));
        pair.planes.push_back(MakePlane(Eigen::Vector3d(-std::sin(a), 0.0, -std::cos(a)), target,
                                        Eigen::Vector3d::UnitY(), density, offset()));
      } else {
        const Eigen::Matrix3d q =
            MinimalRotation(Eigen::Vector3d(1.0, 1.0, 1.0), Eigen::Vector3d::UnitZ());
        for (int i = 0; i < 3; ++i) {
          pair.planes.push_back(MakePlane(-q.col(i), target, q.col((i + 1) % 3), density,
                                          offset()));
        }
      }
      const Eigen::Matrix3d orbit =
          (Eigen::AngleAxisd(spec.pitch_deg * kDegToRad, Eigen::Vector3d::UnitX()) *
           Eigen::AngleAxisd(spec.yaw_deg * kDegToRad, Eigen::Vector3d::UnitY()))
              .toRotationMatrix();
      cam_b = LookAt(target + orbit * (-target), target, spec.roll_deg * kDegToRad);
      break;
    }
  }
  for (const auto& plane : pair.planes) {
    if (!(plane.normal.dot(cam_b.center) - plane.offset > 1e-9)) {
      Fail(ErrorCode::kInvalidSpec, "camera b ends up behind a scene plane");
    }
  }

  const Image texture = ProceduralTexture(spec.texture_size, spec.texture_seed);
  pair.a = Renderer(pair.planes, texture, pair.intrinsics, Camera{})
               .Render(spec.width, spec.height, spec.shape_cell_size);
  pair.b = Renderer(pair.planes, texture, pair.intrinsics, cam_b)
               .Render(spec.width, spec.height, spec.shape_cell_size);
  pair.camera_b_rotation = cam_b.rotation;
  pair.camera_b_center = cam_b.center;
  pair.rotation = cam_b.rotation;
  pair.translation = -cam_b.rotation * cam_b.center;
  if (spec.scene == SceneType::kSinglePlane) {
    const SyntheticPlane& p = pair.planes.front();
    Eigen::Matrix3d h = pair.intrinsics.K() *
                        (pair.rotation + pair.translation * p.normal.transpose() / p.offset) *
                        pair.intrinsics.KInverse();
    pair.homography = h / h(2, 2);
  }
  return pair;
}

std::optional<Eigen::Vector2d> TransferPixel(const SyntheticPair& pair, const Eigen::Vector2d& pa) {
  const Eigen::Vector3d dir = pair.intrinsics.KInverse() * Eigen::Vector3d(pa.x(), pa.y(), 1.0);
  const Hit hit = CastRay(pair.planes, Eigen::Vector3d::Zero(), dir);
  if (hit.plane < 0) return std::nullopt;
  const Eigen::Vector3d point = hit.lambda * dir;
  const Eigen::Vector3d in_b = pair.camera_b_rotation * (point - pair.camera_b_center);
  if (!(in_b.z() > 0.0)) return std::nullopt;
  // Occlusion check: the ray of camera b must reach the same point first.
  const Eigen::Vector3d dir_b = pair.camera_b_rotation.transpose() * (in_b / in_b.z());
  const Hit hit_b = CastRay(pair.planes, pair.camera_b_center, dir_b);
  if (hit_b.plane < 0 ||
      (pair.camera_b_center + hit_b.lambda * dir_b - point).norm() > 1e-6 * point.norm()) {
    return std::nullopt;
  }
  const Eigen::Vector3d pix = pair.intrinsics.K() * in_b;
  return Eigen::Vector2d(pix.x() / pix.z(), pix.y() / pix.z());
}

}  // namespace rectmatch
