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

#include "rectmatch/image.hpp"

#include <algorithm>
#include <cmath>

#include "rectmatch/error.hpp"

namespace rectmatch {

Image::Image(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    Fail(ErrorCode::kInvalidParameter, "negative image dimensions");
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

float Image::Clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

float Image::Bilinear(double x, double y) const {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  const double top = (1.0 - ax) * Clamped(x0, y0) + ax * Clamped(x0 + 1, y0);
  const double bottom =
      (1.0 - ax) * Clamped(x0, y0 + 1) + ax * Clamped(x0 + 1, y0 + 1);
  return static_cast<float>((1.0 - ay) * top + ay * bottom);
}

SegmentMask SegmentMask::Full(int width, int height) {
  SegmentMask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.assign(static_cast<std::size_t>(width) * height, 1);
  return mask;
}

SegmentMask SegmentMask::Empty(int width, int height) {
  SegmentMask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.assign(static_cast<std::size_t>(width) * height, 0);
  return mask;
}

std::size_t SegmentMask::Area() const {
  return static_cast<std::size_t>(
      std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

PixelBox BoundingBox(const SegmentMask& mask) {
  PixelBox box{mask.width, mask.height, -1, -1};
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.Test(x, y)) continue;
      box.min_x = std::min(box.min_x, x);
      box.min_y = std::min(box.min_y, y);
      box.max_x = std::max(box.max_x, x);
      box.max_y = std::max(box.max_y, y);
    }
  }
  return box;
}

namespace {

std::vector<float> GaussianKernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * i * i / (sigma * sigma));
    kernel[i + radius] = static_cast<float>(w);
    sum += w;
  }
  for (auto& w : kernel) w = static_cast<float>(w / sum);
  return kernel;
}

}  // namespace

Image GaussianBlur(const Image& image, double sigma) {
  if (sigma <= 0.0 || image.empty()) return image;
  const auto kernel = GaussianKernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width();
  const int h = image.height();

  Image tmp(w, h);
  std::vector<float> row(static_cast<std::size_t>(w + 2 * radius));
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w + 2 * radius; ++i) {
      row[i] = image.at(std::clamp(i - radius, 0, w - 1), y);
    }
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * row[x + k];
      tmp.at(x, y) = acc;
    }
  }

  Image out(w, h);
  std::vector<float> col(static_cast<std::size_t>(h + 2 * radius));
  for (int x = 0; x < w; ++x) {
    for (int i = 0; i < h + 2 * radius; ++i) {
      col[i] = tmp.at(x, std::clamp(i - radius, 0, h - 1));
    }
    for (int y = 0; y < h; ++y) {
      float acc = 0.0f;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * col[y + k];
      out.at(x, y) = acc;
    }
  }
  return out;
}

Image Downsample2x(const Image& image) {
  Image out((image.width() + 1) / 2, (image.height() + 1) / 2);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = image.at(2 * x, 2 * y);
  }
  return out;
}

Image Rotate90(const Image& image) {
  const int w = image.width();
  Image out(image.height(), w);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = image.at(w - 1 - y, x);
  }
  return out;
}

}  // namespace rectmatch
