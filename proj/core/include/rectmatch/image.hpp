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

#ifndef RECTMATCH_IMAGE_HPP_
#define RECTMATCH_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rectmatch {

// Single channel float image, row-major, intensities nominally in [0, 1].
// Pixel centers sit at integer coordinates.
class Image {
 public:
  Image() = default;
  Image(int width, int height, float fill = 0.0f);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  float& at(int x, int y) { return data_[Index(x, y)]; }
  float at(int x, int y) const { return data_[Index(x, y)]; }
  // Border-clamped access.
  float Clamped(int x, int y) const;
  // Bilinear sample with border clamping.
  float Bilinear(double x, double y) const;

  std::span<float> pixels() noexcept { return data_; }
  std::span<const float> pixels() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// Binary pixel mask. Used for image segments (S_s in the pipeline) and for
// validity masks of warped images.
struct SegmentMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
  std::optional<int> cluster_id;

  static SegmentMask Full(int width, int height);
  static SegmentMask Empty(int width, int height);

  bool Test(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void Set(int x, int y, bool value) {
    bits[static_cast<std::size_t>(y) * width + x] = value ? 1 : 0;
  }
  bool InBoundsAndSet(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height && Test(x, y);
  }

  std::size_t Area() const;
  bool IsFull() const { return Area() == bits.size(); }

  bool operator==(const SegmentMask&) const = default;
};

struct PixelBox {
  int min_x = 0;
  int min_y = 0;
  int max_x = -1;  // inclusive
  int max_y = -1;
  bool empty() const { return max_x < min_x || max_y < min_y; }
};

PixelBox BoundingBox(const SegmentMask& mask);

// Separable Gaussian blur with clamped borders. sigma <= 0 returns a copy.
Image GaussianBlur(const Image& image, double sigma);
// Keeps every second pixel in both directions.
Image Downsample2x(const Image& image);
// Rotates counter-clockwise by 90 degrees when viewed with y pointing down:
// out(x', y') = in(W - 1 - y', x').
Image Rotate90(const Image& image);

// Image file IO. PNG (8/16 bit, gray or color, converted to luminance) and
// binary PGM are recognised by content.
Image ReadImage(const std::string& path);
void WritePng(const std::string& path, const Image& image);
void WritePng(const std::string& path, const Image& image,
              const SegmentMask& valid);

}  // namespace rectmatch

#endif  // RECTMATCH_IMAGE_HPP_
