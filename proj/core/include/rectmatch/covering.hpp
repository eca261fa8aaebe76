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

#ifndef RECTMATCH_COVERING_HPP_
#define RECTMATCH_COVERING_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rectmatch/geometry.hpp"

namespace rectmatch {

inline constexpr int kUnassigned = -1;

// Default r-ball radius, log(1.7), and covered-weight ratio used by the
// pipelines.
inline const double kDefaultCoveringRadius = std::log(1.7);
inline constexpr double kDefaultMinCoveredRatio = 0.95;

// Empirical affine shapes in the space of tilts. Empty weights means every
// point has unit weight.
struct ShapeSet {
  std::vector<TiltPoint> points;
  std::vector<double> weights;

  double Weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

struct Covering {
  std::vector<RBall> balls;       // in selection order
  double covered_ratio = 0.0;     // covered weight / total weight
  std::vector<int> assignment;    // per point: first containing ball, or kUnassigned
};

// Greedy set cover by r-balls. Candidate centers are the origin followed by
// the shape points in order; each round takes the candidate covering the most
// uncovered weight (lowest candidate index on ties) until min_ratio is met.
Covering GreedyCover(const ShapeSet& shapes, double radius, double min_ratio);

// Fixed ASIFT-style covering of the disk log_tilt <= max_log_tilt: the origin
// plus concentric rings of equally spaced centers. Maps are
// diag(t, 1) R(phi) with the identity first.
std::vector<TiltPoint> AsiftCoveringCenters(double max_log_tilt, double radius);
std::vector<AffineMap> AsiftCovering(double max_log_tilt, double radius);

struct GridTiltPoint {
  std::size_t grid_index = 0;
  TiltPoint point;
};

// Label per grid index (vector sized to the largest index + 1): the nearest
// containing ball of the covering, lower ball index on exact ties, or
// kUnassigned.
std::vector<int> AssignMasks(std::span<const GridTiltPoint> field_points,
                             const Covering& covering);

nlohmann::json CoveringToJson(const Covering& covering);

}  // namespace rectmatch

#endif  // RECTMATCH_COVERING_HPP_
