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

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "rectmatch/error.hpp"
#include "rectmatch/warping.hpp"
#include "test_support.hpp"

namespace rectmatch {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kStageFailure;
}

SegmentMask Disk(int w, int h, double cx, double cy, double r) {
  SegmentMask m = SegmentMask::Empty(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.Set(x, y, std::hypot(x - cx, y - cy) <= r);
  }
  return m;
}

Eigen::Matrix3d MildHomography() {
  Eigen::Matrix3d h;
  h << 0.9, 0.15, 4.0, -0.05, 1.1, 2.0, 8e-4, -5e-4, 1.0;
  return h;
}

TEST(WarpMasked, IdentityReproducesTheInput) {
  const Image img = testing::TextureImage(48, 40, 2);
  const WarpResult r = WarpMasked(img, SegmentMask::Full(48, 40), AffineMap::Identity());
  EXPECT_EQ(r.image, img);
  EXPECT_TRUE(r.valid.IsFull());
  EXPECT_EQ(r.record.crop_offset, Eigen::Vector2d::Zero());
  EXPECT_EQ(r.record.blur_sigma_major, 0.0);
  EXPECT_TRUE(r.record.IsIdentity());
  EXPECT_EQ(r.record.Area(), 48u * 40u);
}

TEST(WarpMasked, CompressionBlurWidth) {
  const Image img = testing::TextureImage(64, 64, 3);
  const AffineMap half(Eigen::Vector2d(0.5, 1.0).asDiagonal());
  const WarpResult r = WarpMasked(img, SegmentMask::Full(64, 64), half);
  EXPECT_NEAR(r.record.blur_sigma_major, 0.8 * std::sqrt(3.0), 1e-12);
  EXPECT_EQ(r.record.warped_width, 32);
  EXPECT_EQ(r.record.warped_height, 64);

  const DirectionalBlur b = BlurForLinear(Eigen::Vector2d(0.5, 1.0).asDiagonal());
  Eigen::Index blurred = 0;
  EXPECT_NEAR(b.sigmas.maxCoeff(&blurred), 0.8 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(std::abs(b.directions.col(blurred).dot(Eigen::Vector2d::UnitX())), 1.0, 1e-12);
  EXPECT_EQ(b.sigmas.minCoeff(), 0.0);
  const DirectionalBlur none = BlurForLinear(Eigen::Matrix2d::Identity() * 2.0);
  EXPECT_EQ(none.sigmas, Eigen::Vector2d::Zero());
}

TEST(WarpMasked, UncompressedAxisKeepsItsSignal) {
  const int n = 96;
  Image img(n, n);
  const double period = 12.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      img.at(x, y) = static_cast<float>(0.5 + 0.4 * std::sin(2 * std::numbers::pi * y / period));
    }
  }
  const WarpResult r = WarpMasked(img, SegmentMask::Full(n, n), AffineMap(Eigen::Vector2d(1.0 / 3.0, 1.0).asDiagonal()));
  double peak = 0.0;
  for (int y = 10; y < n - 10; ++y) peak = std::max(peak, std::abs(r.image.at(r.image.width() / 2, y) - 0.5));
  EXPECT_GT(peak, 0.4 * 0.95);
}

TEST(WarpMasked, AffineAreaTracksDeterminant) {
  const SegmentMask mask = Disk(120, 100, 60, 50, 40);
  const Image img = testing::TextureImage(120, 100, 4);
  Eigen::Matrix2d a;
  a << 1.6, 0.4, -0.2, 0.9;
  const WarpResult r = WarpMasked(img, mask, AffineMap(a, Eigen::Vector2d(5, -7)));
  const double expected = a.determinant() * static_cast<double>(mask.Area());
  EXPECT_NEAR(static_cast<double>(r.valid.Area()), expected, 0.02 * expected);
  // Invalid output pixels are zero.
  for (int y = 0; y < r.image.height(); ++y) {
    for (int x = 0; x < r.image.width(); ++x) {
      if (!r.valid.Test(x, y)) EXPECT_EQ(r.image.at(x, y), 0.0f);
    }
  }
}

TEST(Backproject, RoundTripAffineAndHomography) {
  const SegmentMask mask = Disk(100, 80, 50, 40, 35);
  const Image img = testing::TextureImage(100, 80, 5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ux(15.0, 85.0);
  std::uniform_real_distribution<double> uy(5.0, 75.0);
  Eigen::Matrix2d lin;
  lin << 0.7, 0.3, -0.4, 1.8;
  const WarpResult affine = WarpMasked(img, mask, AffineMap(lin, Eigen::Vector2d(3, 4)));
  const WarpResult homog = WarpMasked(img, mask, MildHomography());
  EXPECT_FALSE(homog.record.is_affine);
  for (const WarpRecord* rec : {&affine.record, &homog.record}) {
    std::vector<Eigen::Vector2d> src;
    std::vector<Eigen::Vector2d> warped;
    while (src.size() < 10000) {
      const Eigen::Vector2d p(ux(rng), uy(rng));
      if (!mask.Test(static_cast<int>(std::lround(p.x())), static_cast<int>(std::lround(p.y())))) continue;
      src.push_back(p);
      warped.push_back(rec->Forward(p));
    }
    const auto back = BackprojectPoints(warped, *rec);
    double worst = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) worst = std::max(worst, (back[i] - src[i]).norm());
    EXPECT_LT(worst, 1e-6);
  }
  const WarpRecord id;
  EXPECT_EQ(BackprojectPoint(Eigen::Vector2d(3.5, 2.25), id), Eigen::Vector2d(3.5, 2.25));
}

TEST(Backproject, OutputCornersReturnToTheMaskHull) {
  SegmentMask mask = SegmentMask::Empty(80, 60);
  for (int y = 10; y <= 40; ++y) {
    for (int x = 20; x <= 55; ++x) mask.Set(x, y, true);
  }
  const Image img = testing::TextureImage(80, 60, 7);
  Eigen::Matrix2d lin;
  lin << 1.3, 0.0, 0.0, 0.6;
  const WarpResult r = WarpMasked(img, mask, AffineMap(lin, Eigen::Vector2d(-4, 9)));
  const double w = r.record.warped_width - 1;
  const double h = r.record.warped_height - 1;
  const Eigen::Vector2d c0 = BackprojectPoint({0, 0}, r.record);
  const Eigen::Vector2d c1 = BackprojectPoint({w, h}, r.record);
  EXPECT_LT((c0 - Eigen::Vector2d(20, 10)).norm(), 1.0);
  EXPECT_LT((c1 - Eigen::Vector2d(55, 40)).norm(), 1.0);
}

TEST(WarpMasked, Errors) {
  const Image img(32, 32, 0.5f);
  EXPECT_EQ(CodeOf([&] { WarpMasked(img, SegmentMask::Empty(32, 32), AffineMap::Identity()); }),
            ErrorCode::kEmptyMask);
  EXPECT_EQ(CodeOf([&] { WarpMasked(img, SegmentMask::Full(32, 32), Eigen::Matrix3d::Zero().eval()); }),
            ErrorCode::kSingularMap);
  Eigen::Matrix3d horizon = Eigen::Matrix3d::Identity();
  horizon(2, 0) = -1.0 / 16.0;  // line at infinity x = 16 crosses the mask
  EXPECT_EQ(CodeOf([&] { WarpMasked(img, SegmentMask::Full(32, 32), horizon); }),
            ErrorCode::kSingularMap);
  Eigen::Matrix3d blowup = Eigen::Matrix3d::Identity();
  blowup(2, 0) = -1.0 / 33.0;  // strong perspective stretch near x = 31
  EXPECT_EQ(CodeOf([&] { WarpMasked(img, SegmentMask::Full(32, 32), blowup); }),
            ErrorCode::kOversizeWarp);
  EXPECT_EQ(CodeOf([&] { WarpMasked(img, SegmentMask::Full(31, 32), AffineMap::Identity()); }),
            ErrorCode::kDimensionMismatch);
}

TEST(WarpMasked, MaskedSamplingIgnoresOutsidePixels) {
  Image img(40, 40, 1.0f);
  SegmentMask mask = SegmentMask::Empty(40, 40);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (x < 20) {
        mask.Set(x, y, true);
      } else {
        img.at(x, y) = 0.0f;  // dark, outside the mask
      }
    }
  }
  const WarpResult r = WarpMasked(img, mask, AffineMap(Eigen::Matrix2d::Identity() * 0.5));
  for (int y = 0; y < r.image.height(); ++y) {
    for (int x = 0; x < r.image.width(); ++x) {
      if (r.valid.Test(x, y)) EXPECT_NEAR(r.image.at(x, y), 1.0f, 1e-6);
    }
  }
}

TEST(WarpRecordToJson, CarriesTheBookkeeping) {
  const Image img(32, 32, 0.5f);
  const WarpResult r = WarpMasked(img, SegmentMask::Full(32, 32), MildHomography());
  const nlohmann::json j = WarpRecordToJson(r.record);
  EXPECT_EQ(j.at("warped_size")[0].get<int>(), r.record.warped_width);
  EXPECT_EQ(j.at("is_affine").get<bool>(), false);
  EXPECT_DOUBLE_EQ(j.at("crop_offset")[0].get<double>(), r.record.crop_offset.x());
}

}  // namespace
}  // namespace rectmatch
