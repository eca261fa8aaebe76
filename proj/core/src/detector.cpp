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

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rectmatch/error.hpp"
#include "rectmatch/features.hpp"
#include "scale_space.hpp"

namespace rectmatch {
namespace detail {

void ScaleSpace::Locate(double sigma, int* octave, int* layer) const {
  const double level = std::log2(std::max(sigma, 1e-6) / base_sigma) * scales_per_octave;
  const int last_octave = static_cast<int>(octaves.size()) - 1;
  int o = std::clamp(static_cast<int>(std::floor(level / scales_per_octave)), 0, last_octave);
  const int max_layer = static_cast<int>(octaves[static_cast<std::size_t>(o)].gaussians.size()) - 1;
  const int s = std::clamp(static_cast<int>(std::lround(level - o * scales_per_octave)), 0, max_layer);
  *octave = o;
  *layer = s;
}

ScaleSpace BuildScaleSpace(const Image& image, const DetectorOptions& options, bool with_dogs) {
  ScaleSpace space;
  space.scales_per_octave = options.scales_per_octave;
  space.base_sigma = options.base_sigma;
  const int s = options.scales_per_octave;
  const double k = std::pow(2.0, 1.0 / s);
  const int min_side = std::min(image.width(), image.height());
  const int octave_count = std::max(1, static_cast<int>(std::floor(std::log2(min_side))) - 3);

  std::vector<double> increments(static_cast<std::size_t>(s + 3), 0.0);
  for (int i = 1; i < s + 3; ++i) {
    const double prev = options.base_sigma * std::pow(k, i - 1);
    increments[static_cast<std::size_t>(i)] = prev * std::sqrt(k * k - 1.0);
  }

  Image base = GaussianBlur(
      image, std::sqrt(std::max(0.0, options.base_sigma * options.base_sigma -
                                         options.assumed_input_sigma * options.assumed_input_sigma)));
  for (int o = 0; o < octave_count; ++o) {
    Octave octave;
    octave.gaussians.reserve(static_cast<std::size_t>(s + 3));
    octave.gaussians.push_back(
        o == 0 ? std::move(base)
               : Downsample2x(space.octaves.back().gaussians[static_cast<std::size_t>(s)]));
    for (int i = 1; i < s + 3; ++i) {
      octave.gaussians.push_back(
          GaussianBlur(octave.gaussians.back(), increments[static_cast<std::size_t>(i)]));
    }
    if (with_dogs) {
      for (int i = 0; i + 1 < s + 3; ++i) {
        const Image& lo = octave.gaussians[static_cast<std::size_t>(i)];
        const Image& hi = octave.gaussians[static_cast<std::size_t>(i + 1)];
        Image dog(lo.width(), lo.height());
        auto out = dog.pixels();
        auto a = lo.pixels();
        auto b = hi.pixels();
        for (std::size_t p = 0; p < out.size(); ++p) out[p] = b[p] - a[p];
        octave.dogs.push_back(std::move(dog));
      }
    }
    space.octaves.push_back(std::move(octave));
  }
  return space;
}

Image FillInvalid(const Image& image, const SegmentMask& valid) {
  double sum = 0.0;
  std::size_t count = 0;
  auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (valid.bits[i]) {
      sum += px[i];
      ++count;
    }
  }
  const float mean = count ? static_cast<float>(sum / static_cast<double>(count)) : 0.0f;
  Image out = image;
  auto op = out.pixels();
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (!valid.bits[i]) op[i] = mean;
  }
  return out;
}

}  // namespace detail

namespace {

constexpr double kFar = 1e30;

// One-dimensional squared distance transform of a sampled function
// (lower envelope of parabolas).
void DistanceTransform1D(const std::vector<double>& f, std::vector<double>& d,
                         std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + q * q) - (f[static_cast<std::size_t>(p)] + p * p)) /
          (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k + 1)] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k + 1)] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

struct Candidate {
  Keypoint keypoint;
  double magnitude = 0.0;
};

bool IsExtremum(const std::vector<Image>& dogs, int layer, int x, int y) {
  const float v = dogs[static_cast<std::size_t>(layer)].at(x, y);
  const bool is_max = v > 0.0f;
  for (int ds = -1; ds <= 1; ++ds) {
    const Image& img = dogs[static_cast<std::size_t>(layer + ds)];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (ds == 0 && dy == 0 && dx == 0) continue;
        const float n = img.at(x + dx, y + dy);
        if (is_max ? !(v > n) : !(v < n)) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<double> DistanceToInvalid(const SegmentMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<double> grid(static_cast<std::size_t>(w) * h);
  bool any_invalid = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = mask.bits[i] ? kFar : 0.0;
    any_invalid = any_invalid || !mask.bits[i];
  }
  if (!any_invalid) {
    std::fill(grid.begin(), grid.end(), std::numeric_limits<double>::infinity());
    return grid;
  }
  const int n = std::max(w, h);
  std::vector<double> f;
  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x < w; ++x) {
    f.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y) * w + x];
    d.resize(f.size());
    DistanceTransform1D(f, d, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
  }
  for (int y = 0; y < h; ++y) {
    f.assign(grid.begin() + static_cast<std::ptrdiff_t>(y) * w,
             grid.begin() + static_cast<std::ptrdiff_t>(y + 1) * w);
    d.resize(f.size());
    DistanceTransform1D(f, d, v, z);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = std::sqrt(d[static_cast<std::size_t>(x)]);
  }
  return grid;
}

std::vector<Keypoint> detail::DetectInScaleSpace(const ScaleSpace& space,
                                                 const std::vector<double>* distance,
                                                 int frame_width, const DetectorOptions& options) {
  const int s_count = options.scales_per_octave;
  const double threshold = options.contrast_threshold / s_count;
  const double prefilter = 0.5 * threshold;
  const double edge = (options.edge_ratio + 1.0) * (options.edge_ratio + 1.0) / options.edge_ratio;
  constexpr int kBorder = 5;
  constexpr int kMaxSteps = 5;

  std::vector<Candidate> candidates;
  for (std::size_t o = 0; o < space.octaves.size(); ++o) {
    const auto& dogs = space.octaves[o].dogs;
    const int w = dogs[0].width();
    const int h = dogs[0].height();
    const double step = std::ldexp(1.0, static_cast<int>(o));
    for (int layer = 1; layer <= s_count; ++layer) {
      for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
          if (std::abs(dogs[static_cast<std::size_t>(layer)].at(x, y)) <= prefilter) continue;
          if (!IsExtremum(dogs, layer, x, y)) continue;

          int cx = x;
          int cy = y;
          int cl = layer;
          Eigen::Vector3d offset;
          Eigen::Vector3d gradient;
          Eigen::Matrix3d hessian;
          bool converged = false;
          for (int iter = 0; iter < kMaxSteps; ++iter) {
            const Image& prev = dogs[static_cast<std::size_t>(cl - 1)];
            const Image& cur = dogs[static_cast<std::size_t>(cl)];
            const Image& next = dogs[static_cast<std::size_t>(cl + 1)];
            const double v = cur.at(cx, cy);
            gradient << 0.5 * (cur.at(cx + 1, cy) - cur.at(cx - 1, cy)),
                0.5 * (cur.at(cx, cy + 1) - cur.at(cx, cy - 1)),
                0.5 * (next.at(cx, cy) - prev.at(cx, cy));
            const double dxx = cur.at(cx + 1, cy) + cur.at(cx - 1, cy) - 2.0 * v;
            const double dyy = cur.at(cx, cy + 1) + cur.at(cx, cy - 1) - 2.0 * v;
            const double dss = next.at(cx, cy) + prev.at(cx, cy) - 2.0 * v;
            const double dxy = 0.25 * (cur.at(cx + 1, cy + 1) - cur.at(cx - 1, cy + 1) -
                                       cur.at(cx + 1, cy - 1) + cur.at(cx - 1, cy - 1));
            const double dxs = 0.25 * (next.at(cx + 1, cy) - next.at(cx - 1, cy) -
                                       prev.at(cx + 1, cy) + prev.at(cx - 1, cy));
            const double dys = 0.25 * (next.at(cx, cy + 1) - next.at(cx, cy - 1) -
                                       prev.at(cx, cy + 1) + prev.at(cx, cy - 1));
            hessian << dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss;
            const Eigen::FullPivLU<Eigen::Matrix3d> lu(hessian);
            if (!lu.isInvertible()) break;
            offset = -lu.solve(gradient);
            if (offset.cwiseAbs().maxCoeff() < 0.5) {
              converged = true;
              break;
            }
            if (offset.cwiseAbs().maxCoeff() > 1e3) break;
            cx += static_cast<int>(std::lround(offset.x()));
            cy += static_cast<int>(std::lround(offset.y()));
            cl += static_cast<int>(std::lround(offset.z()));
            if (cl < 1 || cl > s_count || cx < kBorder || cy < kBorder || cx >= w - kBorder ||
                cy >= h - kBorder) {
              break;
            }
          }
          if (!converged) continue;

          const double value =
              dogs[static_cast<std::size_t>(cl)].at(cx, cy) + 0.5 * gradient.dot(offset);
          if (std::abs(value) < threshold) continue;
          const double trace = hessian(0, 0) + hessian(1, 1);
          const double det = hessian(0, 0) * hessian(1, 1) - hessian(0, 1) * hessian(0, 1);
          if (det <= 0.0 || trace * trace * 1.0 >= edge * det) continue;

          Keypoint kp;
          kp.position = Eigen::Vector2d((cx + offset.x()) * step, (cy + offset.y()) * step);
          kp.scale = options.base_sigma * std::pow(2.0, (cl + offset.z()) / s_count) * step;
          kp.response = value;
          if (distance) {
            const int px = static_cast<int>(std::lround(kp.position.x()));
            const int py = static_cast<int>(std::lround(kp.position.y()));
            const double dist =
                (*distance)[static_cast<std::size_t>(py) * frame_width + px];
            if (dist < std::max(options.invalid_margin_px, 3.0 * kp.scale)) continue;
          }
          candidates.push_back({kp, std::abs(value)});
        }
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    if (a.keypoint.position.y() != b.keypoint.position.y()) {
      return a.keypoint.position.y() < b.keypoint.position.y();
    }
    if (a.keypoint.position.x() != b.keypoint.position.x()) {
      return a.keypoint.position.x() < b.keypoint.position.x();
    }
    return a.keypoint.scale < b.keypoint.scale;
  });
  if (options.max_keypoints >= 0 &&
      candidates.size() > static_cast<std::size_t>(options.max_keypoints)) {
    candidates.resize(static_cast<std::size_t>(options.max_keypoints));
  }
  std::vector<Keypoint> out;
  out.reserve(candidates.size());
  for (auto& c : candidates) out.push_back(c.keypoint);
  return out;
}

namespace {

void CheckDetectable(const Image& image, const SegmentMask* valid, const DetectorOptions& options) {
  if (std::min(image.width(), image.height()) < options.min_image_side) {
    Fail(ErrorCode::kImageTooSmall, "image side below " + std::to_string(options.min_image_side) + " px");
  }
  if (valid && (valid->width != image.width() || valid->height != image.height())) {
    Fail(ErrorCode::kDimensionMismatch, "validity mask does not match the image");
  }
  if (options.scales_per_octave < 1 || !(options.base_sigma > 0.0)) {
    Fail(ErrorCode::kInvalidParameter, "invalid detector options");
  }
}

}  // namespace

std::vector<Keypoint> Detect(const Image& image, const SegmentMask* valid,
                             const DetectorOptions& options) {
  CheckDetectable(image, valid, options);
  const Image source = valid ? detail::FillInvalid(image, *valid) : image;
  const auto space = detail::BuildScaleSpace(source, options, true);
  std::vector<double> distance;
  if (valid) distance = DistanceToInvalid(*valid);
  return detail::DetectInScaleSpace(space, valid ? &distance : nullptr, image.width(), options);
}

FeatureSet DetectAndDescribe(const Image& image, const SegmentMask* valid,
                             const DetectorOptions& options) {
  CheckDetectable(image, valid, options);
  const Image source = valid ? detail::FillInvalid(image, *valid) : image;
  const auto space = detail::BuildScaleSpace(source, options, true);
  std::vector<double> distance;
  if (valid) distance = DistanceToInvalid(*valid);
  FeatureSet set;
  set.keypoints = detail::DetectInScaleSpace(space, valid ? &distance : nullptr, image.width(), options);
  set.descriptors = detail::DescribeInScaleSpace(space, set.keypoints);
  return set;
}

}  // namespace rectmatch
