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

#include "rectmatch/shape_field.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "rectmatch/error.hpp"

namespace rectmatch {

DenseShapeField::DenseShapeField(int image_width, int image_height, int cell_size,
                                 std::vector<Eigen::Matrix2d> shapes,
                                 ShapeConvention convention)
    : image_width_(image_width),
      image_height_(image_height),
      cell_size_(cell_size),
      width_cells_(0),
      height_cells_(0),
      convention_(convention),
      stored_(std::move(shapes)) {
  if (image_width <= 0 || image_height <= 0 || cell_size <= 0) {
    Fail(ErrorCode::kDimensionMismatch, "shape field needs positive dimensions");
  }
  width_cells_ = (image_width + cell_size - 1) / cell_size;
  height_cells_ = (image_height + cell_size - 1) / cell_size;
  const auto expected = static_cast<std::size_t>(width_cells_) * height_cells_;
  if (stored_.size() != expected) {
    Fail(ErrorCode::kDimensionMismatch, "expected " + std::to_string(expected) +
                                            " shapes, got " + std::to_string(stored_.size()));
  }
  for (std::size_t i = 0; i < stored_.size(); ++i) {
    if (!stored_[i].allFinite() || !(stored_[i].determinant() > 0.0)) {
      Fail(ErrorCode::kNonPositiveDetShape,
           "cell " + std::to_string(i) + " has a non-finite or det <= 0 shape");
    }
  }
}

DenseShapeField DenseShapeField::Identity(int image_width, int image_height, int cell_size) {
  const int wc = cell_size > 0 ? (image_width + cell_size - 1) / cell_size : 0;
  const int hc = cell_size > 0 ? (image_height + cell_size - 1) / cell_size : 0;
  return DenseShapeField(image_width, image_height, cell_size,
                         std::vector<Eigen::Matrix2d>(static_cast<std::size_t>(wc) * hc,
                                                      Eigen::Matrix2d::Identity()));
}

Eigen::Matrix2d DenseShapeField::Rectifying(std::size_t index) const {
  return convention_ == ShapeConvention::kRectifying ? stored_[index]
                                                     : Eigen::Matrix2d(stored_[index].inverse());
}

std::size_t DenseShapeField::CellIndexAt(double x, double y) const {
  const int cx = std::clamp(static_cast<int>(std::floor((x + 0.5) / cell_size_)), 0,
                            width_cells_ - 1);
  const int cy = std::clamp(static_cast<int>(std::floor((y + 0.5) / cell_size_)), 0,
                            height_cells_ - 1);
  return CellIndex(cx, cy);
}

SparseShapes SampleSparseShapes(const DenseShapeField& field,
                                std::span<const Eigen::Vector2d> positions) {
  SparseShapes out;
  out.entries.reserve(positions.size());
  for (const auto& p : positions) {
    out.entries.push_back({p, field.Rectifying(field.CellIndexAt(p.x(), p.y()))});
  }
  return out;
}

DenseShapeField EstimateShapeFieldStructureTensor(const Image& image, int cell_size,
                                                  const StructureTensorOptions& options) {
  if (cell_size <= 0) Fail(ErrorCode::kInvalidParameter, "cell_size must be > 0");
  if (image.empty() || std::min(image.width(), image.height()) < cell_size) {
    Fail(ErrorCode::kImageTooSmall, "image smaller than one cell");
  }
  const int w = image.width();
  const int h = image.height();
  const Image smooth = GaussianBlur(image, options.derivative_sigma);

  Image gxx(w, h), gxy(w, h), gyy(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float gx = 0.5f * (smooth.Clamped(x + 1, y) - smooth.Clamped(x - 1, y));
      const float gy = 0.5f * (smooth.Clamped(x, y + 1) - smooth.Clamped(x, y - 1));
      gxx.at(x, y) = gx * gx;
      gxy.at(x, y) = gx * gy;
      gyy.at(x, y) = gy * gy;
    }
  }
  const double window = options.window_sigma_cells * cell_size;
  gxx = GaussianBlur(gxx, window);
  gxy = GaussianBlur(gxy, window);
  gyy = GaussianBlur(gyy, window);

  const int wc = (w + cell_size - 1) / cell_size;
  const int hc = (h + cell_size - 1) / cell_size;
  std::vector<Eigen::Matrix2d> tensors(static_cast<std::size_t>(wc) * hc);
  double trace_sum = 0.0;
  for (int cy = 0; cy < hc; ++cy) {
    for (int cx = 0; cx < wc; ++cx) {
      // Center of the (possibly partial) block.
      const double px = std::min(cx * cell_size + 0.5 * (cell_size - 1), w - 1.0);
      const double py = std::min(cy * cell_size + 0.5 * (cell_size - 1), h - 1.0);
      Eigen::Matrix2d m;
      const double xy = gxy.Bilinear(px, py);
      m << gxx.Bilinear(px, py), xy, xy, gyy.Bilinear(px, py);
      tensors[static_cast<std::size_t>(cy) * wc + cx] = m;
      trace_sum += m.trace();
    }
  }

  const double mean_trace = trace_sum / static_cast<double>(tensors.size());
  std::vector<Eigen::Matrix2d> shapes(tensors.size(), Eigen::Matrix2d::Identity());
  if (mean_trace > 0.0) {
    const double epsilon = options.regularizer * mean_trace;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const Eigen::Matrix2d m = tensors[i] + epsilon * Eigen::Matrix2d::Identity();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
      const Eigen::Vector2d values = eig.eigenvalues().cwiseMax(epsilon);
      const Eigen::Matrix2d root = eig.eigenvectors() *
                                   values.cwiseSqrt().asDiagonal() *
                                   eig.eigenvectors().transpose();
      shapes[i] = root / std::sqrt(root.determinant());
    }
  }
  return DenseShapeField(w, h, cell_size, std::move(shapes));
}

std::vector<GridTiltPoint> FieldToTiltPoints(const DenseShapeField& field) {
  std::vector<GridTiltPoint> points;
  points.reserve(field.cell_count());
  for (std::size_t i = 0; i < field.cell_count(); ++i) {
    points.push_back({i, TiltCoords(field.Rectifying(i))});
  }
  return points;
}

LabelMasks MasksFromLabels(const DenseShapeField& field, std::span<const int> labels,
                           std::size_t label_count) {
  if (labels.size() != field.cell_count()) {
    Fail(ErrorCode::kLabelMismatch, "one label per cell required");
  }
  for (int label : labels) {
    if (label != kUnassigned && (label < 0 || static_cast<std::size_t>(label) >= label_count)) {
      Fail(ErrorCode::kLabelMismatch, "label " + std::to_string(label) + " outside covering");
    }
  }
  const int w = field.image_width();
  const int h = field.image_height();
  LabelMasks masks;
  masks.per_label.assign(label_count, SegmentMask::Empty(w, h));
  for (std::size_t l = 0; l < label_count; ++l) masks.per_label[l].cluster_id = static_cast<int>(l);
  masks.unassigned = SegmentMask::Empty(w, h);

  const int cs = field.cell_size();
  for (int cy = 0; cy < field.height_cells(); ++cy) {
    for (int cx = 0; cx < field.width_cells(); ++cx) {
      const int label = labels[field.CellIndex(cx, cy)];
      SegmentMask& target = label == kUnassigned ? masks.unassigned : masks.per_label[label];
      for (int y = cy * cs; y < std::min(h, (cy + 1) * cs); ++y) {
        for (int x = cx * cs; x < std::min(w, (cx + 1) * cs); ++x) target.Set(x, y, true);
      }
    }
  }
  return masks;
}

}  // namespace rectmatch
