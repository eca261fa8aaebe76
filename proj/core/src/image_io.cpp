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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include "rectmatch/error.hpp"
#include "rectmatch/image.hpp"

namespace rectmatch {
namespace {

bool HasPngSignature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Image ReadPng(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    Fail(ErrorCode::kIoError, path + ": " + png.message);
  }
  png.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    Fail(ErrorCode::kIoError, path + ": " + png.message);
  }
  Image image(static_cast<int>(png.width), static_cast<int>(png.height));
  auto pixels = image.pixels();
  for (std::size_t i = 0; i < buffer.size(); ++i) pixels[i] = buffer[i] / 255.0f;
  return image;
}

// Binary (P5) PGM with maxval up to 65535.
Image ReadPgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path);
  auto next_token = [&in]() {
    std::string token;
    while (in >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return token;
    }
    return std::string{};
  };
  if (next_token() != "P5") Fail(ErrorCode::kFormatError, path + ": not a PNG or P5 PGM");
  const int width = std::stoi(next_token());
  const int height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  in.get();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    Fail(ErrorCode::kFormatError, path + ": bad PGM header");
  }
  Image image(width, height);
  auto pixels = image.pixels();
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(pixels.size() * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    Fail(ErrorCode::kFormatError, path + ": truncated PGM data");
  }
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
    pixels[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return image;
}

std::uint8_t ToByte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

void WritePngBuffer(const std::string& path, int width, int height,
                    std::uint32_t format, const std::vector<std::uint8_t>& buffer) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = format;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    Fail(ErrorCode::kIoError, path + ": " + png.message);
  }
}

}  // namespace

Image ReadImage(const std::string& path) {
  return HasPngSignature(path) ? ReadPng(path) : ReadPgm(path);
}

void WritePng(const std::string& path, const Image& image) {
  std::vector<std::uint8_t> buffer(image.size());
  auto pixels = image.pixels();
  std::transform(pixels.begin(), pixels.end(), buffer.begin(), ToByte);
  WritePngBuffer(path, image.width(), image.height(), PNG_FORMAT_GRAY, buffer);
}

void WritePng(const std::string& path, const Image& image, const SegmentMask& valid) {
  if (valid.width != image.width() || valid.height != image.height()) {
    Fail(ErrorCode::kDimensionMismatch, "validity mask does not match image");
  }
  std::vector<std::uint8_t> buffer(2 * image.size());
  auto pixels = image.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    buffer[2 * i] = ToByte(pixels[i]);
    buffer[2 * i + 1] = valid.bits[i] ? 255 : 0;
  }
  WritePngBuffer(path, image.width(), image.height(), PNG_FORMAT_GA, buffer);
}

}  // namespace rectmatch
