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
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <benchmark/benchmark.h>

#include "rectmatch/covering.hpp"
#include "rectmatch/estimation.hpp"
#include "rectmatch/features.hpp"
#include "rectmatch/geometry.hpp"
#include "rectmatch/image.hpp"
#include "rectmatch/warping.hpp"
#include "test_support.hpp"

namespace rectmatch {
namespace {

std::vector<TiltPoint> RandomTilts(std::size_t count, double max_log_tilt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_tilt(0.0, max_log_tilt);
  std::uniform_real_distribution<double> phi(0.0, 3.141592653589793);
  std::vector<TiltPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(log_tilt(rng), phi(rng));
  return out;
}

void BM_TiltDistance(benchmark::State& state) {
  const auto points = RandomTilts(1024, 2.0, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(TiltDistance(points[i & 1023], points[(i * 7 + 3) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_TiltDistance);

void BM_GreedyCover(benchmark::State& state) {
  ShapeSet shapes;
  shapes.points = RandomTilts(static_cast<std::size_t>(state.range(0)), 1.5, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(GreedyCover(shapes, kDefaultCoveringRadius, 0.95));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedyCover)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);

void BM_AsiftCovering(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(AsiftCoveringCenters(std::log(6.0), kDefaultCoveringRadius));
}
BENCHMARK(BM_AsiftCovering)->Unit(benchmark::kMicrosecond);

void BM_WarpAffine(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image image = testing::TextureImage(side, side, 3);
  const SegmentMask mask = SegmentMask::Full(side, side);
  const AffineMap map(CanonicalLinear(TiltPoint(std::log(2.5), 0.7)));
  for (auto _ : state) benchmark::DoNotOptimize(WarpMasked(image, mask, map));
}
BENCHMARK(BM_WarpAffine)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DetectAndDescribe(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image image = testing::TextureImage(side, side, 5);
  for (auto _ : state) benchmark::DoNotOptimize(DetectAndDescribe(image, nullptr));
}
BENCHMARK(BM_DetectAndDescribe)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MatchDescriptors(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(9);
  std::normal_distribution<float> g;
  DescriptorMatrix a(kDescriptorSize, n);
  DescriptorMatrix b(kDescriptorSize, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      a(r, c) = g(rng);
      b(r, c) = a(r, c) + 0.1f * g(rng);
    }
    a.col(c).normalize();
    b.col(c).normalize();
  }
  for (auto _ : state) benchmark::DoNotOptimize(MatchDescriptors(a, b));
}
BENCHMARK(BM_MatchDescriptors)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_EstimateEssential(benchmark::State& state) {
  const auto scene = testing::MakePoseScene(4, 100, 0.5, 0.3);
  RansacConfig config;
  config.threshold_px = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(EstimateEssential(scene.pts_a, scene.pts_b, scene.k, scene.k, config));
  }
}
BENCHMARK(BM_EstimateEssential)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace rectmatch

BENCHMARK_MAIN();
