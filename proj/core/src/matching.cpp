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
#include <limits>
#include <numeric>
#include <unordered_map>

#include "rectmatch/features.hpp"

namespace rectmatch {
namespace {

constexpr Eigen::Index kBlock = 512;
// Float GEMM dot products are only used to shortlist; anything within this
// margin of the second-best is rescored exactly.
constexpr float kShortlistMargin = 1e-4f;

struct NearestTwo {
  int best = -1;
  double best_distance = std::numeric_limits<double>::infinity();
  double second_distance = std::numeric_limits<double>::infinity();
};

// For every column of `queries`, the exact nearest and second-nearest
// distances to columns of `data`. Exact ties go to the column whose index is
// closest to the query's, then to the lower index, so a set matched against
// itself pairs duplicates with themselves.
std::vector<NearestTwo> FindNearestTwo(const DescriptorMatrix& queries,
                                       const DescriptorMatrix& data) {
  const Eigen::Index nq = queries.cols();
  const Eigen::Index nd = data.cols();
  std::vector<NearestTwo> out(static_cast<std::size_t>(nq));
  if (nd == 0) return out;
  std::vector<int> shortlist;
  for (Eigen::Index start = 0; start < nq; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, nq - start);
    const Eigen::MatrixXf dots = queries.middleCols(start, len).transpose() * data;
    for (Eigen::Index r = 0; r < len; ++r) {
      float top1 = -std::numeric_limits<float>::infinity();
      float top2 = top1;
      for (Eigen::Index c = 0; c < nd; ++c) {
        const float v = dots(r, c);
        if (v > top1) {
          top2 = top1;
          top1 = v;
        } else if (v > top2) {
          top2 = v;
        }
      }
      const float cutoff = (nd > 1 ? top2 : top1) - kShortlistMargin;
      shortlist.clear();
      for (Eigen::Index c = 0; c < nd; ++c) {
        if (dots(r, c) >= cutoff) shortlist.push_back(static_cast<int>(c));
      }
      const auto q = static_cast<int>(start + r);
      NearestTwo& result = out[static_cast<std::size_t>(q)];
      for (int c : shortlist) {
        const double d = DescriptorDistance(queries, q, data, c);
        const bool closer_tie = d == result.best_distance && std::abs(c - q) < std::abs(result.best - q);
        if (d < result.best_distance || closer_tie) {
          result.second_distance = result.best_distance;
          result.best_distance = d;
          result.best = c;
        } else if (d < result.second_distance) {
          result.second_distance = d;
        }
      }
    }
  }
  return out;
}

}  // namespace

double DescriptorDistance(const DescriptorMatrix& a, int ia, const DescriptorMatrix& b, int ib) {
  double sum = 0.0;
  for (int k = 0; k < kDescriptorSize; ++k) {
    const double d = static_cast<double>(a(k, ia)) - static_cast<double>(b(k, ib));
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<Match> MatchDescriptors(const DescriptorMatrix& a, const DescriptorMatrix& b,
                                    double ratio_threshold) {
  std::vector<Match> matches;
  if (a.cols() == 0 || b.cols() == 0) return matches;
  const auto forward = FindNearestTwo(a, b);
  const auto backward = FindNearestTwo(b, a);
  auto ratio_of = [](double best, double second) {
    if (best == 0.0) return 0.0;
    return std::isinf(second) ? 0.0 : best / second;
  };
  for (std::size_t i = 0; i < forward.size(); ++i) {
    const NearestTwo& f = forward[i];
    if (f.best < 0) continue;
    const NearestTwo& g = backward[static_cast<std::size_t>(f.best)];
    if (g.best != static_cast<int>(i)) continue;
    const double ratio =
        std::max(ratio_of(f.best_distance, f.second_distance),
                 ratio_of(g.best_distance, g.second_distance));
    if (ratio > ratio_threshold) continue;
    matches.push_back({static_cast<int>(i), f.best, f.best_distance, ratio});
  }
  return matches;
}

void FeatureSet::Append(const FeatureSet& other) {
  const Eigen::Index old = descriptors.cols();
  keypoints.insert(keypoints.end(), other.keypoints.begin(), other.keypoints.end());
  descriptors.conservativeResize(kDescriptorSize, old + other.descriptors.cols());
  descriptors.rightCols(other.descriptors.cols()) = other.descriptors;
}

bool FeatureSet::operator==(const FeatureSet& other) const {
  return keypoints == other.keypoints && descriptors.cols() == other.descriptors.cols() &&
         descriptors == other.descriptors;
}

FeatureSet MergeFeatures(std::span<const FeatureSet> sets, double dedupe_radius_px) {
  struct Ref {
    std::size_t set;
    std::size_t index;
  };
  std::vector<Ref> originals;
  std::vector<Ref> rectified;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t i = 0; i < sets[s].keypoints.size(); ++i) {
      (sets[s].keypoints[i].provenance == kOriginalProvenance ? originals : rectified)
          .push_back({s, i});
    }
  }
  auto kp = [&](const Ref& r) -> const Keypoint& { return sets[r.set].keypoints[r.index]; };

  std::vector<std::size_t> order(rectified.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const Keypoint& a = kp(rectified[x]);
    const Keypoint& b = kp(rectified[y]);
    if (std::abs(a.response) != std::abs(b.response)) {
      return std::abs(a.response) > std::abs(b.response);
    }
    return a.provenance < b.provenance;
  });

  // Greedy suppression on a hash grid with cell size = radius.
  const double cell = std::max(dedupe_radius_px, 1e-9);
  const double r2 = dedupe_radius_px * dedupe_radius_px;
  auto key = [](long long gx, long long gy) { return (gx << 32) ^ (gy & 0xffffffffLL); };
  std::unordered_map<long long, std::vector<Eigen::Vector2d>> grid;
  std::vector<bool> keep(rectified.size(), false);
  for (std::size_t idx : order) {
    const Eigen::Vector2d p = kp(rectified[idx]).position;
    const auto gx = static_cast<long long>(std::floor(p.x() / cell));
    const auto gy = static_cast<long long>(std::floor(p.y() / cell));
    bool suppressed = false;
    if (dedupe_radius_px > 0.0) {
      for (long long dy = -1; dy <= 1 && !suppressed; ++dy) {
        for (long long dx = -1; dx <= 1 && !suppressed; ++dx) {
          const auto it = grid.find(key(gx + dx, gy + dy));
          if (it == grid.end()) continue;
          for (const auto& q : it->second) {
            if ((q - p).squaredNorm() < r2) {
              suppressed = true;
              break;
            }
          }
        }
      }
    }
    if (suppressed) continue;
    keep[idx] = true;
    grid[key(gx, gy)].push_back(p);
  }

  FeatureSet out;
  std::size_t total = originals.size();
  for (bool k : keep) total += k ? 1 : 0;
  out.keypoints.reserve(total);
  out.descriptors.resize(kDescriptorSize, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  auto emit = [&](const Ref& r) {
    out.keypoints.push_back(kp(r));
    out.descriptors.col(col++) = sets[r.set].descriptors.col(static_cast<Eigen::Index>(r.index));
  };
  for (const Ref& r : originals) emit(r);
  for (std::size_t i = 0; i < rectified.size(); ++i) {
    if (keep[i]) emit(rectified[i]);
  }
  return out;
}

}  // namespace rectmatch
