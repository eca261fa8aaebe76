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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "rectmatch/features.hpp"
#include "scale_space.hpp"

namespace rectmatch {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kOrientationBins = 36;
constexpr int kGrid = 4;
constexpr int kAngleBins = 8;

double DominantOrientation(const Image& img, double x, double y, double sigma) {
  const double window_sigma = 1.5 * sigma;
  const int radius = static_cast<int>(std::lround(3.0 * window_sigma));
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  std::array<double, kOrientationBins> hist{};
  for (int dy = -radius; dy <= radius; ++dy) {
    const int py = cy + dy;
    if (py < 1 || py >= img.height() - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = cx + dx;
      if (px < 1 || px >= img.width() - 1) continue;
      const double gx = img.at(px + 1, py) - img.at(px - 1, py);
      const double gy = img.at(px, py + 1) - img.at(px, py - 1);
      const double weight = std::exp(-(dx * dx + dy * dy) / (2.0 * window_sigma * window_sigma));
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += kTwoPi;
      int bin = static_cast<int>(std::floor(angle * kOrientationBins / kTwoPi));
      bin = std::clamp(bin, 0, kOrientationBins - 1);
      hist[static_cast<std::size_t>(bin)] += weight * std::hypot(gx, gy);
    }
  }
  std::array<double, kOrientationBins> smooth{};
  for (int i = 0; i < kOrientationBins; ++i) {
    auto at = [&](int k) {
      return hist[static_cast<std::size_t>((k + kOrientationBins) % kOrientationBins)];
    };
    smooth[static_cast<std::size_t>(i)] =
        (at(i - 2) + at(i + 2)) / 16.0 + 4.0 * (at(i - 1) + at(i + 1)) / 16.0 + 6.0 * at(i) / 16.0;
  }
  const auto peak_it = std::max_element(smooth.begin(), smooth.end());
  if (*peak_it <= 0.0) return 0.0;
  const int peak = static_cast<int>(peak_it - smooth.begin());
  const double left = smooth[static_cast<std::size_t>((peak + kOrientationBins - 1) % kOrientationBins)];
  const double right = smooth[static_cast<std::size_t>((peak + 1) % kOrientationBins)];
  const double denom = left - 2.0 * *peak_it + right;
  const double shift = denom != 0.0 ? 0.5 * (left - right) / denom : 0.0;
  double angle = (peak + 0.5 + shift) * kTwoPi / kOrientationBins;
  angle = std::fmod(angle, kTwoPi);
  if (angle < 0.0) angle += kTwoPi;
  return angle;
}

void DescribeOne(const Image& img, double x, double y, double sigma, double orientation,
                 float* out) {
  std::array<double, kGrid * kGrid * kAngleBins> hist{};
  const double cell = 3.0 * sigma;
  const int radius = std::min(
      static_cast<int>(std::lround(cell * std::numbers::sqrt2 * (kGrid + 1) * 0.5)),
      static_cast<int>(std::hypot(img.width(), img.height())));
  const double cos_t = std::cos(orientation);
  const double sin_t = std::sin(orientation);
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  const double fx = x - cx;
  const double fy = y - cy;
  const double gauss_scale = -1.0 / (2.0 * (0.5 * kGrid) * (0.5 * kGrid));

  for (int dy = -radius; dy <= radius; ++dy) {
    const int py = cy + dy;
    if (py < 1 || py >= img.height() - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = cx + dx;
      if (px < 1 || px >= img.width() - 1) continue;
      const double ox = dx - fx;
      const double oy = dy - fy;
      // Sample offset in the keypoint frame, in cell units.
      const double c_rot = (ox * cos_t + oy * sin_t) / cell;
      const double r_rot = (-ox * sin_t + oy * cos_t) / cell;
      const double rbin = r_rot + 0.5 * kGrid - 0.5;
      const double cbin = c_rot + 0.5 * kGrid - 0.5;
      if (rbin <= -1.0 || rbin >= kGrid || cbin <= -1.0 || cbin >= kGrid) continue;

      const double gx = img.at(px + 1, py) - img.at(px - 1, py);
      const double gy = img.at(px, py + 1) - img.at(px, py - 1);
      const double magnitude = std::hypot(gx, gy) *
                               std::exp((c_rot * c_rot + r_rot * r_rot) * gauss_scale);
      if (magnitude == 0.0) continue;
      double angle = std::atan2(gy, gx) - orientation;
      angle = std::fmod(angle, kTwoPi);
      if (angle < 0.0) angle += kTwoPi;
      const double obin = angle * kAngleBins / kTwoPi;

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      const int o0 = static_cast<int>(std::floor(obin));
      const double dr = rbin - r0;
      const double dc = cbin - c0;
      const double dor = obin - o0;
      for (int ir = 0; ir < 2; ++ir) {
        const int r = r0 + ir;
        if (r < 0 || r >= kGrid) continue;
        const double wr = ir ? dr : 1.0 - dr;
        for (int ic = 0; ic < 2; ++ic) {
          const int c = c0 + ic;
          if (c < 0 || c >= kGrid) continue;
          const double wc = ic ? dc : 1.0 - dc;
          for (int io = 0; io < 2; ++io) {
            const int o = (o0 + io) % kAngleBins;
            const double wo = io ? dor : 1.0 - dor;
            hist[static_cast<std::size_t>((r * kGrid + c) * kAngleBins + o)] +=
                magnitude * wr * wc * wo;
          }
        }
      }
    }
  }

  // Clip large gradients (SIFT), then RootSIFT: L1 normalise and square
  // root, which yields unit L2 norm.
  double norm2 = 0.0;
  for (double v : hist) norm2 += v * v;
  if (norm2 > 0.0) {
    const double clip = 0.2 * std::sqrt(norm2);
    for (double& v : hist) v = std::min(v, clip);
  }
  double l1 = 0.0;
  for (double v : hist) l1 += v;
  if (!(l1 > 0.0)) {
    std::fill(out, out + kDescriptorSize, static_cast<float>(1.0 / std::sqrt(kDescriptorSize)));
    return;
  }
  for (std::size_t i = 0; i < hist.size(); ++i) out[i] = static_cast<float>(std::sqrt(hist[i] / l1));
}

}  // namespace

DescriptorMatrix detail::DescribeInScaleSpace(const ScaleSpace& space,
                                              std::vector<Keypoint>& keypoints) {
  DescriptorMatrix out(kDescriptorSize, static_cast<Eigen::Index>(keypoints.size()));
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    Keypoint& kp = keypoints[i];
    int octave = 0;
    int layer = 0;
    space.Locate(kp.scale, &octave, &layer);
    const Image& img =
        space.octaves[static_cast<std::size_t>(octave)].gaussians[static_cast<std::size_t>(layer)];
    const double step = std::ldexp(1.0, octave);
    const double x = kp.position.x() / step;
    const double y = kp.position.y() / step;
    const double sigma = kp.scale / step;
    kp.orientation = DominantOrientation(img, x, y, sigma);
    DescribeOne(img, x, y, sigma, kp.orientation, out.col(static_cast<Eigen::Index>(i)).data());
  }
  return out;
}

DescriptorMatrix Describe(const Image& image, std::vector<Keypoint>& keypoints,
                          const DetectorOptions& options) {
  if (keypoints.empty()) return DescriptorMatrix(kDescriptorSize, 0);
  const auto space = detail::BuildScaleSpace(image, options, false);
  return detail::DescribeInScaleSpace(space, keypoints);
}

}  // namespace rectmatch
