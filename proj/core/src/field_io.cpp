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

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rectmatch/error.hpp"
#include "rectmatch/shape_field.hpp"
#include "binary_io.hpp"

namespace rectmatch {
namespace {

using detail::ByteReader;
using detail::ByteWriter;
using detail::ReadFile;
using detail::WriteFile;

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 * 4 + 1;

}  // namespace

std::vector<std::uint8_t> EncodeShapeField(const DenseShapeField& field) {
  ByteWriter w;
  w.Magic("SHPF");
  w.U32(kFormatVersion);
  w.U32(static_cast<std::uint32_t>(field.image_width()));
  w.U32(static_cast<std::uint32_t>(field.image_height()));
  w.U32(static_cast<std::uint32_t>(field.cell_size()));
  w.U8(static_cast<std::uint8_t>(field.convention()));
  for (std::size_t i = 0; i < field.cell_count(); ++i) {
    const Eigen::Matrix2d& a = field.Stored(i);
    w.F32(static_cast<float>(a(0, 0)));
    w.F32(static_cast<float>(a(0, 1)));
    w.F32(static_cast<float>(a(1, 0)));
    w.F32(static_cast<float>(a(1, 1)));
  }
  return w.Take();
}

DenseShapeField DecodeShapeField(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) Fail(ErrorCode::kFormatError, "file shorter than header");
  ByteReader r(bytes);
  if (!r.Magic("SHPF")) Fail(ErrorCode::kFormatError, "bad magic, expected SHPF");
  const std::uint32_t version = r.U32();
  if (version != kFormatVersion) {
    Fail(ErrorCode::kFormatError, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t width = r.U32();
  const std::uint32_t height = r.U32();
  const std::uint32_t cell = r.U32();
  const std::uint8_t convention = r.U8();
  if (convention > 1) Fail(ErrorCode::kFormatError, "unknown convention flag");
  if (width == 0 || height == 0 || cell == 0 || width > (1u << 20) || height > (1u << 20)) {
    Fail(ErrorCode::kDimensionMismatch, "header declares no cells");
  }
  const std::size_t cells = static_cast<std::size_t>((width + cell - 1) / cell) *
                            ((height + cell - 1) / cell);
  if (r.remaining() != cells * 16) {
    Fail(ErrorCode::kDimensionMismatch,
         "expected " + std::to_string(cells) + " cells, payload has " +
             std::to_string(r.remaining()) + " bytes");
  }
  std::vector<Eigen::Matrix2d> shapes(cells);
  for (auto& a : shapes) {
    const double a11 = r.F32();
    const double a12 = r.F32();
    const double a21 = r.F32();
    const double a22 = r.F32();
    a << a11, a12, a21, a22;
  }
  return DenseShapeField(static_cast<int>(width), static_cast<int>(height),
                         static_cast<int>(cell), std::move(shapes),
                         static_cast<ShapeConvention>(convention));
}

void SaveShapeField(const std::string& path, const DenseShapeField& field) {
  WriteFile(path, EncodeShapeField(field));
}

DenseShapeField LoadShapeField(const std::string& path) {
  const auto bytes = ReadFile(path);
  return DecodeShapeField(bytes);
}

bool DepthMap::Valid(int x, int y) const {
  const float d = at(x, y);
  return std::isfinite(d) && d > 0.0f;
}

std::vector<std::uint8_t> EncodeDepthMap(const DepthMap& depth) {
  ByteWriter w;
  w.Magic("DPTH");
  w.U32(kFormatVersion);
  w.U32(static_cast<std::uint32_t>(depth.width));
  w.U32(static_cast<std::uint32_t>(depth.height));
  w.U32(1);
  w.U8(0);
  for (float d : depth.meters) w.F32(d);
  return w.Take();
}

DepthMap DecodeDepthMap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) Fail(ErrorCode::kFormatError, "file shorter than header");
  ByteReader r(bytes);
  if (!r.Magic("DPTH")) Fail(ErrorCode::kFormatError, "bad magic, expected DPTH");
  const std::uint32_t version = r.U32();
  if (version != kFormatVersion) {
    Fail(ErrorCode::kFormatError, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t width = r.U32();
  const std::uint32_t height = r.U32();
  const std::uint32_t cell = r.U32();
  r.U8();
  if (cell != 1) Fail(ErrorCode::kFormatError, "depth maps must have cell_size 1");
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20)) {
    Fail(ErrorCode::kDimensionMismatch, "depth header declares no pixels");
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (r.remaining() != count * 4) {
    Fail(ErrorCode::kDimensionMismatch, "depth payload does not match header");
  }
  DepthMap depth(static_cast<int>(width), static_cast<int>(height));
  for (auto& d : depth.meters) d = r.F32();
  return depth;
}

std::string IntrinsicsSidecarPath(const std::string& depth_path) {
  return depth_path + ".json";
}

void SaveDepthMap(const std::string& path, const DepthMap& depth,
                  const std::optional<CameraIntrinsics>& intrinsics) {
  WriteFile(path, EncodeDepthMap(depth));
  if (intrinsics) {
    std::ofstream out(IntrinsicsSidecarPath(path));
    if (!out) Fail(ErrorCode::kIoError, "cannot write intrinsics sidecar for " + path);
    out << IntrinsicsToJson(*intrinsics).dump(2) << "\n";
  }
}

DepthMap LoadDepthMap(const std::string& path) { return DecodeDepthMap(ReadFile(path)); }

CameraIntrinsics LoadIntrinsicsSidecar(const std::string& depth_path) {
  const std::string sidecar = IntrinsicsSidecarPath(depth_path);
  std::ifstream in(sidecar);
  if (!in) Fail(ErrorCode::kMissingAuxInput, "missing intrinsics sidecar " + sidecar);
  try {
    return IntrinsicsFromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormatError, sidecar + ": " + e.what());
  }
}

namespace detail {

std::vector<std::uint8_t> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIoError, "short write to " + path);
}

}  // namespace detail

}  // namespace rectmatch
