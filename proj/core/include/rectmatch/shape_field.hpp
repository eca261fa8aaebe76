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

#ifndef RECTMATCH_SHAPE_FIELD_HPP_
#define RECTMATCH_SHAPE_FIELD_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rectmatch/camera.hpp"
#include "rectmatch/covering.hpp"
#include "rectmatch/image.hpp"

namespace rectmatch {

// How the 2x2 matrices of a shape field file are to be read.
enum class ShapeConvention : std::uint8_t {
  kRectifying = 0,  // apply to the patch to normalise it
  kInverted = 1,    // patch shape; inverted on use
};

// One affine shape per cell_size x cell_size pixel block, row-major.
// Matrices are kept as stored; Rectifying() applies the convention.
class DenseShapeField {
 public:
  DenseShapeField(int image_width, int image_height, int cell_size,
                  std::vector<Eigen::Matrix2d> shapes,
                  ShapeConvention convention = ShapeConvention::kRectifying);

  static DenseShapeField Identity(int image_width, int image_height, int cell_size = 4);

  int image_width() const noexcept { return image_width_; }
  int image_height() const noexcept { return image_height_; }
  int cell_size() const noexcept { return cell_size_; }
  int width_cells() const noexcept { return width_cells_; }
  int height_cells() const noexcept { return height_cells_; }
  std::size_t cell_count() const noexcept { return stored_.size(); }
  ShapeConvention convention() const noexcept { return convention_; }

  const Eigen::Matrix2d& Stored(std::size_t index) const { return stored_[index]; }
  Eigen::Matrix2d Rectifying(std::size_t index) const;
  std::size_t CellIndex(int cell_x, int cell_y) const {
    return static_cast<std::size_t>(cell_y) * width_cells_ + cell_x;
  }
  // Cell containing pixel position (x, y), clamped into the grid.
  std::size_t CellIndexAt(double x, double y) const;

 private:
  int image_width_;
  int image_height_;
  int cell_size_;
  int width_cells_;
  int height_cells_;
  ShapeConvention convention_;
  std::vector<Eigen::Matrix2d> stored_;
};

struct SparseShape {
  Eigen::Vector2d position;
  Eigen::Matrix2d shape;  // rectifying, det > 0
};

struct SparseShapes {
  std::vector<SparseShape> entries;
};

// Looks up the rectifying shape of the cell under each position.
SparseShapes SampleSparseShapes(const DenseShapeField& field,
                                std::span<const Eigen::Vector2d> positions);

// SHAPEFIELD container: "SHPF", u32 version = 1, u32 image_width,
// u32 image_height, u32 cell_size, u8 convention, then float32 quadruples
// (a11, a12, a21, a22) per cell, row-major, little endian.
void SaveShapeField(const std::string& path, const DenseShapeField& field);
DenseShapeField LoadShapeField(const std::string& path);
std::vector<std::uint8_t> EncodeShapeField(const DenseShapeField& field);
DenseShapeField DecodeShapeField(std::span<const std::uint8_t> bytes);

// Per-pixel metric depth; values <= 0 or non-finite are invalid.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> meters;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), meters(static_cast<std::size_t>(w) * h, fill) {}

  float at(int x, int y) const { return meters[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return meters[static_cast<std::size_t>(y) * width + x]; }
  bool Valid(int x, int y) const;

  bool operator==(const DepthMap&) const = default;
};

// DPTH container: the SHPF header layout with magic "DPTH", cell_size = 1
// and convention = 0, followed by one float32 per pixel. Intrinsics live in a
// JSON sidecar at `<path>.json`.
void SaveDepthMap(const std::string& path, const DepthMap& depth,
                  const std::optional<CameraIntrinsics>& intrinsics = std::nullopt);
DepthMap LoadDepthMap(const std::string& path);
std::vector<std::uint8_t> EncodeDepthMap(const DepthMap& depth);
DepthMap DecodeDepthMap(std::span<const std::uint8_t> bytes);
std::string IntrinsicsSidecarPath(const std::string& depth_path);
CameraIntrinsics LoadIntrinsicsSidecar(const std::string& depth_path);

struct StructureTensorOptions {
  double derivative_sigma = 1.0;   // pre-smoothing before differences, pixels
  double window_sigma_cells = 2.5; // Gaussian integration window, in cells
  double regularizer = 1e-4;       // epsilon = regularizer * mean trace
};

// Classical stand-in for a dense affine shape network: per cell, the square
// root of the regularised second-moment matrix, scaled to unit determinant.
// That map whitens the local gradient distribution, i.e. rectifies the patch.
DenseShapeField EstimateShapeFieldStructureTensor(
    const Image& image, int cell_size = 4, const StructureTensorOptions& options = {});

std::vector<GridTiltPoint> FieldToTiltPoints(const DenseShapeField& field);

struct LabelMasks {
  std::vector<SegmentMask> per_label;  // one per covering ball
  SegmentMask unassigned;              // identity mask
};

// Expands per-cell labels to pixel masks. Masks are pairwise disjoint and
// together cover the image.
LabelMasks MasksFromLabels(const DenseShapeField& field, std::span<const int> labels,
                           std::size_t label_count);

}  // namespace rectmatch

#endif  // RECTMATCH_SHAPE_FIELD_HPP_
