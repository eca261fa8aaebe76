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
#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <filesystem>
#include <numbers>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "rectmatch/covering.hpp"
#include "rectmatch/error.hpp"
#include "rectmatch/shape_field.hpp"
#include "test_support.hpp"

namespace rectmatch {
namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kStageFailure;
}

std::vector<std::uint8_t> Header(const char* magic, std::uint32_t w, std::uint32_t h,
                                 std::uint32_t cell, std::uint8_t convention) {
  std::vector<std::uint8_t> b(magic, magic + 4);
  for (std::uint32_t v : {1u, w, h, cell}) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  b.push_back(convention);
  return b;
}

void AppendFloat(std::vector<std::uint8_t>& b, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

DenseShapeField RandomField(int w, int h, int cell, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  std::uniform_real_distribution<double> s(-0.5, 0.5);
  const int cw = (w + cell - 1) / cell;
  const int ch = (h + cell - 1) / cell;
  std::vector<Eigen::Matrix2d> shapes;
  for (int i = 0; i < cw * ch; ++i) {
    Eigen::Matrix2d m;
    m << u(rng), s(rng), s(rng), u(rng);
    shapes.push_back(m);
  }
  return DenseShapeField(w, h, cell, shapes);
}

// Circular mean of phi on the doubled circle, weighted by log tilt.
double DominantPhi(const DenseShapeField& f) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < f.cell_count(); ++i) {
    const TiltPoint p = TiltCoords(f.Rectifying(i));
    acc += p.log_tilt() * std::polar(1.0, 2.0 * p.phi());
  }
  double phi = 0.5 * std::arg(acc);
  return phi < 0 ? phi + kPi : phi;
}

TEST(DenseShapeField, GridSizeFollowsCeilRule) {
  const DenseShapeField f = DenseShapeField::Identity(65, 30, 4);
  EXPECT_EQ(f.width_cells(), 17);
  EXPECT_EQ(f.height_cells(), 8);
  EXPECT_EQ(f.cell_count(), 136u);
  EXPECT_EQ(f.CellIndexAt(64.0, 29.0), f.CellIndex(16, 7));
  EXPECT_EQ(f.CellIndexAt(-3.0, 100.0), f.CellIndex(0, 7));
}

TEST(DenseShapeField, ValidatesShapes) {
  EXPECT_EQ(CodeOf([] { DenseShapeField(8, 8, 4, std::vector<Eigen::Matrix2d>(3)); }),
            ErrorCode::kDimensionMismatch);
  std::vector<Eigen::Matrix2d> shapes(4, Eigen::Matrix2d::Identity());
  shapes[2] << 1.0, 0.0, 0.0, -1.0;
  EXPECT_EQ(CodeOf([&] { DenseShapeField(8, 8, 4, shapes); }), ErrorCode::kNonPositiveDetShape);
}

TEST(DenseShapeField, InvertedConventionIsInvertedOnUse) {
  Eigen::Matrix2d m;
  m << 2.0, 0.3, 0.0, 0.5;
  const DenseShapeField f(4, 4, 4, {m}, ShapeConvention::kInverted);
  EXPECT_LT((f.Rectifying(0) - m.inverse()).norm(), 1e-12);
  EXPECT_EQ(f.Stored(0), m);
}

TEST(ShapeFieldFile, RoundTripIsBitExact) {
  const DenseShapeField f = RandomField(37, 21, 4, 3);
  const auto bytes = EncodeShapeField(f);
  EXPECT_EQ(bytes.size(), 21u + 16u * f.cell_count());
  const DenseShapeField g = DecodeShapeField(bytes);
  EXPECT_EQ(EncodeShapeField(g), bytes);
  const auto path = (std::filesystem::temp_directory_path() / "rectmatch_field_test.shpf").string();
  SaveShapeField(path, f);
  EXPECT_EQ(EncodeShapeField(LoadShapeField(path)), bytes);
  std::filesystem::remove(path);
}

TEST(ShapeFieldFile, SixtyFourSquareImageHasSixteenSquareCells) {
  auto bytes = Header("SHPF", 64, 64, 4, 1);
  for (int i = 0; i < 256; ++i) {
    for (float v : {1.0f, 0.0f, 0.0f, 1.0f}) AppendFloat(bytes, v);
  }
  const DenseShapeField f = DecodeShapeField(bytes);
  EXPECT_EQ(f.width_cells(), 16);
  EXPECT_EQ(f.height_cells(), 16);
  EXPECT_EQ(f.convention(), ShapeConvention::kInverted);
  EXPECT_EQ(EncodeShapeField(f), bytes);
}

TEST(ShapeFieldFile, RejectsMalformedInput) {
  EXPECT_EQ(CodeOf([] { DecodeShapeField(Header("SHPF", 0, 0, 4, 0)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(CodeOf([] { DecodeShapeField(Header("XXXX", 4, 4, 4, 0)); }), ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf([] { DecodeShapeField(Header("SHPF", 4, 4, 4, 7)); }), ErrorCode::kFormatError);
  // Header promises one cell, payload is missing.
  EXPECT_EQ(CodeOf([] { DecodeShapeField(Header("SHPF", 4, 4, 4, 0)); }),
            ErrorCode::kDimensionMismatch);
  auto bytes = Header("SHPF", 4, 4, 4, 0);
  for (float v : {1.0f, 0.0f, 0.0f, 0.0f}) AppendFloat(bytes, v);
  EXPECT_EQ(CodeOf([&] { DecodeShapeField(bytes); }), ErrorCode::kNonPositiveDetShape);
  std::vector<std::uint8_t> version2 = Header("SHPF", 4, 4, 4, 0);
  version2[4] = 2;
  EXPECT_EQ(CodeOf([&] { DecodeShapeField(version2); }), ErrorCode::kFormatError);
}

TEST(DepthFile, RoundTripWithSidecar) {
  DepthMap d(5, 3, 2.5f);
  d.at(1, 1) = 0.0f;
  const auto bytes = EncodeDepthMap(d);
  EXPECT_EQ(DecodeDepthMap(bytes), d);
  const auto path = (std::filesystem::temp_directory_path() / "rectmatch_depth_test.dpth").string();
  const CameraIntrinsics k{500.0, 510.0, 2.0, 1.0};
  SaveDepthMap(path, d, k);
  EXPECT_EQ(LoadDepthMap(path), d);
  EXPECT_EQ(LoadIntrinsicsSidecar(path), k);
  EXPECT_FALSE(d.Valid(1, 1));
  EXPECT_TRUE(d.Valid(0, 0));
  std::filesystem::remove(path);
  std::filesystem::remove(IntrinsicsSidecarPath(path));
  EXPECT_EQ(CodeOf([] { DecodeDepthMap(Header("DPTH", 2, 2, 4, 0)); }), ErrorCode::kFormatError);
}

TEST(StructureTensor, ConstantImageGivesIdentity) {
  const DenseShapeField f = EstimateShapeFieldStructureTensor(Image(40, 24, 0.5f), 4);
  EXPECT_EQ(f.width_cells(), 10);
  EXPECT_EQ(f.height_cells(), 6);
  for (std::size_t i = 0; i < f.cell_count(); ++i) {
    EXPECT_LT((f.Rectifying(i) - Eigen::Matrix2d::Identity()).norm(), 1e-9);
  }
  EXPECT_EQ(CodeOf([] { EstimateShapeFieldStructureTensor(Image(3, 40), 4); }),
            ErrorCode::kImageTooSmall);
}

TEST(StructureTensor, UnitDeterminant) {
  const DenseShapeField f = EstimateShapeFieldStructureTensor(testing::TextureImage(64, 48, 5), 4);
  for (std::size_t i = 0; i < f.cell_count(); ++i) {
    EXPECT_NEAR(f.Rectifying(i).determinant(), 1.0, 1e-9);
  }
}

// Texture stretched by 2 along x.
Image Stretched(int w, int h, std::uint64_t seed) {
  const Image tex = testing::TextureImage(w, h, seed);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = tex.Bilinear(x / 2.0, y);
  }
  return out;
}

TEST(StructureTensor, RecoversStretchTilt) {
  const int w = 128;
  const int h = 128;
  const DenseShapeField f = EstimateShapeFieldStructureTensor(Stretched(w, h, 12), 4);
  int interior = 0;
  int good = 0;
  for (int cy = 3; cy < f.height_cells() - 3; ++cy) {
    for (int cx = 3; cx < f.width_cells() - 3; ++cx) {
      const double t = DecomposeLinear(f.Rectifying(f.CellIndex(cx, cy))).tilt;
      ++interior;
      good += std::abs(t - 2.0) <= 0.5 ? 1 : 0;
    }
  }
  EXPECT_GE(good, 0.7 * interior) << good << " of " << interior;
}

TEST(StructureTensor, RotationRotatesDominantPhi) {
  const Image img = Stretched(96, 96, 31);
  const double before = DominantPhi(EstimateShapeFieldStructureTensor(img, 4));
  const double after = DominantPhi(EstimateShapeFieldStructureTensor(Rotate90(img), 4));
  double diff = std::fmod(after - before + 2.0 * kPi, kPi);
  diff = std::abs(diff - kPi / 2.0);
  EXPECT_LT(diff * 180.0 / kPi, 10.0);
}

TEST(FieldToTiltPoints, OnePointPerCell) {
  std::vector<Eigen::Matrix2d> shapes(12, Eigen::Matrix2d::Identity());
  shapes[5] << 3.0, 0.0, 0.0, 1.0;
  const DenseShapeField f(16, 12, 4, shapes);
  const auto pts = FieldToTiltPoints(f);
  ASSERT_EQ(pts.size(), 12u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(pts[i].grid_index, i);
    if (i == 5) {
      EXPECT_NEAR(pts[i].point.log_tilt(), std::log(3.0), 1e-12);
      EXPECT_NEAR(pts[i].point.phi(), 0.0, 1e-12);
    } else {
      EXPECT_TRUE(pts[i].point.IsOrigin());
    }
  }
}

TEST(SampleSparseShapes, LooksUpCellUnderPosition) {
  const DenseShapeField f = RandomField(16, 16, 4, 8);
  const std::vector<Eigen::Vector2d> pos = {{5.2, 9.9}, {15.0, 0.0}};
  const SparseShapes s = SampleSparseShapes(f, pos);
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries[0].shape, f.Rectifying(f.CellIndex(1, 2)));
  EXPECT_EQ(s.entries[1].shape, f.Rectifying(f.CellIndex(3, 0)));
  EXPECT_EQ(s.entries[0].position, pos[0]);
}

TEST(MasksFromLabels, CheckerboardPartitionsTheImage) {
  const DenseShapeField f = DenseShapeField::Identity(30, 22, 4);  // partial edge cells
  std::vector<int> labels(f.cell_count());
  for (int cy = 0; cy < f.height_cells(); ++cy) {
    for (int cx = 0; cx < f.width_cells(); ++cx) labels[f.CellIndex(cx, cy)] = (cx + cy) % 2;
  }
  const LabelMasks m = MasksFromLabels(f, labels, 2);
  ASSERT_EQ(m.per_label.size(), 2u);
  EXPECT_EQ(m.per_label[0].Area() + m.per_label[1].Area(), 30u * 22u);
  EXPECT_EQ(m.unassigned.Area(), 0u);
  for (int y = 0; y < 22; ++y) {
    for (int x = 0; x < 30; ++x) {
      const bool zero = ((x / 4) + (y / 4)) % 2 == 0;
      EXPECT_EQ(m.per_label[0].Test(x, y), zero);
      EXPECT_EQ(m.per_label[1].Test(x, y), !zero);
    }
  }
}

TEST(MasksFromLabels, SingleLabelAndAllUnassigned) {
  const DenseShapeField f = DenseShapeField::Identity(12, 8, 4);
  const LabelMasks one = MasksFromLabels(f, std::vector<int>(f.cell_count(), 0), 1);
  EXPECT_TRUE(one.per_label[0].IsFull());
  const LabelMasks none = MasksFromLabels(f, std::vector<int>(f.cell_count(), kUnassigned), 1);
  EXPECT_TRUE(none.unassigned.IsFull());
  EXPECT_EQ(none.per_label[0].Area(), 0u);
  EXPECT_EQ(CodeOf([&] { MasksFromLabels(f, std::vector<int>(2, 0), 1); }),
            ErrorCode::kLabelMismatch);
  EXPECT_EQ(CodeOf([&] { MasksFromLabels(f, std::vector<int>(f.cell_count(), 3), 1); }),
            ErrorCode::kLabelMismatch);
}

}  // namespace
}  // namespace rectmatch
