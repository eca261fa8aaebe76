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

#include "rectmatch/covering.hpp"

#include <algorithm>
#include <numbers>
#include <queue>
#include <tuple>

#include "rectmatch/error.hpp"

namespace rectmatch {
namespace {

constexpr double kPi = std::numbers::pi;

void ValidateShapes(const ShapeSet& shapes) {
  if (shapes.points.empty()) Fail(ErrorCode::kEmptyShapeSet, "no shapes to cover");
  if (!shapes.weights.empty()) {
    if (shapes.weights.size() != shapes.points.size()) {
      Fail(ErrorCode::kInvalidParameter, "weights and points differ in length");
    }
    for (double w : shapes.weights) {
      if (!std::isfinite(w) || w <= 0.0) {
        Fail(ErrorCode::kInvalidParameter, "shape weights must be finite and > 0");
      }
    }
  }
}

}  // namespace

Covering GreedyCover(const ShapeSet& shapes, double radius, double min_ratio) {
  ValidateShapes(shapes);
  if (!(radius > 0.0)) Fail(ErrorCode::kInvalidParameter, "radius must be > 0");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0)) {
    Fail(ErrorCode::kInvalidParameter, "min_ratio must be in (0, 1]");
  }

  const std::size_t n = shapes.points.size();
  std::vector<TiltParts> parts;
  parts.reserve(n);
  for (const auto& p : shapes.points) parts.emplace_back(p);

  std::vector<TiltPoint> candidates;
  candidates.reserve(n + 1);
  candidates.push_back(TiltPoint::Origin());
  candidates.insert(candidates.end(), shapes.points.begin(), shapes.points.end());

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += shapes.Weight(i);

  std::vector<bool> covered(n, false);
  auto gain_of = [&](std::size_t c) {
    const TiltParts center(candidates[c]);
    double gain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!covered[i] && std::log(TransitionTilt(center, parts[i])) <= radius) {
        gain += shapes.Weight(i);
      }
    }
    return gain;
  };

  // Lazy greedy: gains only shrink as points get covered, so a stale gain is
  // an upper bound. Keys order by (gain desc, index asc), which makes the
  // selection identical to a full argmax with lowest-index tie breaking.
  using Entry = std::tuple<double, std::size_t>;
  auto worse = [](const Entry& a, const Entry& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return std::get<1>(a) > std::get<1>(b);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t c = 0; c < candidates.size(); ++c) heap.emplace(gain_of(c), c);

  Covering result;
  double covered_weight = 0.0;
  while (covered_weight < min_ratio * total && !heap.empty()) {
    auto [stale, c] = heap.top();
    heap.pop();
    const double gain = gain_of(c);
    if (gain <= 0.0) continue;
    if (!heap.empty() && worse(Entry{gain, c}, heap.top())) {
      heap.emplace(gain, c);
      continue;
    }
    const RBall ball{candidates[c], radius};
    const TiltParts center(ball.center);
    for (std::size_t i = 0; i < n; ++i) {
      if (!covered[i] && std::log(TransitionTilt(center, parts[i])) <= radius) {
        covered[i] = true;
        covered_weight += shapes.Weight(i);
      }
    }
    result.balls.push_back(ball);
  }

  result.assignment.assign(n, kUnassigned);
  double assigned_weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < result.balls.size(); ++b) {
      if (RBallContains(result.balls[b], shapes.points[i])) {
        result.assignment[i] = static_cast<int>(b);
        assigned_weight += shapes.Weight(i);
        break;
      }
    }
  }
  result.covered_ratio = assigned_weight / total;
  return result;
}

std::vector<TiltPoint> AsiftCoveringCenters(double max_log_tilt, double radius) {
  if (!(max_log_tilt > 0.0) || !(radius > 0.0)) {
    Fail(ErrorCode::kInvalidParameter, "max_log_tilt and radius must be > 0");
  }
  std::vector<TiltPoint> centers{TiltPoint::Origin()};
  if (max_log_tilt <= radius) return centers;

  // Rings every `step` in log tilt; each ring is responsible for the annulus
  // of half-width step / 2 around it. Grid checks use a slightly shrunk
  // radius so that the gaps between grid samples stay covered.
  const double step = radius;
  const double check_radius = 0.98 * radius;
  constexpr int kRadialSamples = 24;
  constexpr int kAngularSamples = 48;
  constexpr int kMaxPerRing = 100000;

  for (int k = 1;; ++k) {
    const double ring = k * step;
    const double lo = std::max(radius, ring - step / 2.0);
    const double hi = std::min(max_log_tilt, ring + step / 2.0);
    if (lo > max_log_tilt) break;

    // Ring symmetry: with n centers at phi = j pi / n, checking the half
    // sector [0, pi / (2n)] against the center at phi = 0 suffices.
    int count = 1;
    for (; count <= kMaxPerRing; ++count) {
      const TiltParts center(TiltPoint(ring, 0.0));
      const double half_sector = kPi / (2.0 * count);
      bool ok = true;
      for (int i = 0; i <= kRadialSamples && ok; ++i) {
        const double rho = lo + (hi - lo) * i / kRadialSamples;
        for (int j = 0; j <= kAngularSamples; ++j) {
          const double phi = half_sector * j / kAngularSamples;
          if (std::log(TransitionTilt(center, TiltParts(TiltPoint(rho, phi)))) > check_radius) {
            ok = false;
            break;
          }
        }
      }
      if (ok) break;
    }
    if (count > kMaxPerRing) Fail(ErrorCode::kInvalidParameter, "covering did not converge");
    for (int j = 0; j < count; ++j) centers.emplace_back(ring, kPi * j / count);
    if (ring + step / 2.0 >= max_log_tilt) break;
  }
  return centers;
}

std::vector<AffineMap> AsiftCovering(double max_log_tilt, double radius) {
  std::vector<AffineMap> maps;
  for (const auto& c : AsiftCoveringCenters(max_log_tilt, radius)) {
    maps.emplace_back(CanonicalLinear(c));
  }
  return maps;
}

std::vector<int> AssignMasks(std::span<const GridTiltPoint> field_points,
                             const Covering& covering) {
  std::size_t size = 0;
  for (const auto& fp : field_points) size = std::max(size, fp.grid_index + 1);
  std::vector<int> labels(size, kUnassigned);

  std::vector<TiltParts> centers;
  for (const auto& ball : covering.balls) centers.emplace_back(ball.center);

  for (const auto& fp : field_points) {
    const TiltParts p(fp.point);
    int best = kUnassigned;
    double best_distance = 0.0;
    for (std::size_t b = 0; b < centers.size(); ++b) {
      const double d = std::log(TransitionTilt(centers[b], p));
      if (d > covering.balls[b].radius) continue;
      if (best == kUnassigned || d < best_distance) {
        best = static_cast<int>(b);
        best_distance = d;
      }
    }
    labels[fp.grid_index] = best;
  }
  return labels;
}

nlohmann::json CoveringToJson(const Covering& covering) {
  nlohmann::json balls = nlohmann::json::array();
  for (const auto& ball : covering.balls) {
    balls.push_back({{"center", {ball.center.log_tilt(), ball.center.phi()}},
                     {"radius", ball.radius}});
  }
  return {{"balls", balls}, {"covered_ratio", covering.covered_ratio}};
}

}  // namespace rectmatch
