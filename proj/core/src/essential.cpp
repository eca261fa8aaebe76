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

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rectmatch/error.hpp"
#include "rectmatch/estimation.hpp"
#include "ransac_util.hpp"

namespace rectmatch {
namespace {

constexpr int kEssentialSample = 8;
constexpr int kMaxRefits = 5;
constexpr int kLocalRounds = 4;
constexpr double kLocalGate = 2.0;
constexpr double kPolishGate = 3.0;

// Depths of the linear triangulation in both cameras.
bool InFrontOfBoth(const Eigen::Matrix3d& r, const Eigen::Vector3d& t, const Eigen::Vector2d& xa,
                   const Eigen::Vector2d& xb) {
  Eigen::Matrix<double, 3, 4> pb;
  pb << r, t;
  Eigen::Matrix4d a;
  a.row(0) << -1.0, 0.0, xa.x(), 0.0;
  a.row(1) << 0.0, -1.0, xa.y(), 0.0;
  a.row(2) = xb.x() * pb.row(2) - pb.row(0);
  a.row(3) = xb.y() * pb.row(2) - pb.row(1);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d x = svd.matrixV().col(3);
  if (x.w() == 0.0) return false;
  const Eigen::Vector3d point = x.head<3>() / x.w();
  return point.z() > 0.0 && (r * point + t).z() > 0.0;
}

int CountInliers(const Eigen::Matrix3d& f, std::span<const Eigen::Vector2d> pa,
                 std::span<const Eigen::Vector2d> pb, double threshold,
                 std::vector<std::uint8_t>* mask) {
  int count = 0;
  if (mask) mask->assign(pa.size(), 0);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (EpipolarErrorPx(f, pa[i], pb[i]) <= threshold) {
      ++count;
      if (mask) (*mask)[i] = 1;
    }
  }
  return count;
}

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Epipolar error with sign, so that its square is differentiable.
double SignedEpipolarErrorPx(const Eigen::Matrix3d& f, const Eigen::Vector2d& pa,
                             const Eigen::Vector2d& pb) {
  const Eigen::Vector3d a(pa.x(), pa.y(), 1.0);
  const Eigen::Vector3d b(pb.x(), pb.y(), 1.0);
  const Eigen::Vector3d line_b = f * a;
  const Eigen::Vector3d line_a = f.transpose() * b;
  const double na = line_a.head<2>().squaredNorm();
  const double nb = line_b.head<2>().squaredNorm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return b.dot(line_b) * std::sqrt(0.5 * (1.0 / na + 1.0 / nb));
}

// Pose on the 5-dimensional manifold: R exp(w) and the unit translation
// moved in the tangent plane of t.
struct PoseUpdate {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
};

PoseUpdate ApplyDelta(const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                      const Eigen::Matrix<double, 5, 1>& delta) {
  Eigen::Vector3d u = t.unitOrthogonal();
  const Eigen::Vector3d v = t.cross(u);
  const Eigen::Vector3d w = delta.head<3>();
  const double angle = w.norm();
  const Eigen::Matrix3d dr =
      angle > 0.0 ? Eigen::AngleAxisd(angle, w / angle).toRotationMatrix()
                  : Eigen::Matrix3d::Identity();
  return {dr * r, (t + delta(3) * u + delta(4) * v).normalized()};
}

// Levenberg-Marquardt on the epipolar errors of the given correspondences.
void RefinePose(std::span<const Eigen::Vector2d> pa, std::span<const Eigen::Vector2d> pb,
                const CameraIntrinsics& k_a, const CameraIntrinsics& k_b, Eigen::Matrix3d* r,
                Eigen::Vector3d* t) {
  const auto n = static_cast<Eigen::Index>(pa.size());
  if (n < kEssentialSample) return;
  auto residuals = [&](const Eigen::Matrix3d& rr, const Eigen::Vector3d& tt) {
    const Eigen::Matrix3d f = FundamentalFromEssential(Skew(tt) * rr, k_a, k_b);
    Eigen::VectorXd res(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      res(i) = SignedEpipolarErrorPx(f, pa[static_cast<std::size_t>(i)],
                                     pb[static_cast<std::size_t>(i)]);
    }
    return res;
  };
  Eigen::VectorXd res = residuals(*r, *t);
  double cost = res.squaredNorm();
  double lambda = 1e-3;
  constexpr double kStep = 1e-7;
  for (int iteration = 0; iteration < 30; ++iteration) {
    Eigen::Matrix<double, Eigen::Dynamic, 5> jac(n, 5);
    for (int k = 0; k < 5; ++k) {
      Eigen::Matrix<double, 5, 1> d = Eigen::Matrix<double, 5, 1>::Zero();
      d(k) = kStep;
      const PoseUpdate plus = ApplyDelta(*r, *t, d);
      const PoseUpdate minus = ApplyDelta(*r, *t, -d);
      jac.col(k) = (residuals(plus.rotation, plus.translation) -
                    residuals(minus.rotation, minus.translation)) /
                   (2.0 * kStep);
    }
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 5, 1> jtr = jac.transpose() * res;
    bool improved = false;
    while (lambda < 1e10) {
      Eigen::Matrix<double, 5, 5> a = jtj;
      a.diagonal() *= 1.0 + lambda;
      const Eigen::Matrix<double, 5, 1> delta = a.ldlt().solve(-jtr);
      const PoseUpdate next = ApplyDelta(*r, *t, delta);
      const Eigen::VectorXd next_res = residuals(next.rotation, next.translation);
      const double next_cost = next_res.squaredNorm();
      if (next_cost < cost) {
        const double gain = cost - next_cost;
        *r = next.rotation;
        *t = next.translation;
        res = next_res;
        cost = next_cost;
        lambda = std::max(1e-9, lambda / 10.0);
        improved = gain > 1e-12 * (1.0 + cost);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
}

// Inlier count, abandoned (with a result <= to_beat) as soon as it can no
// longer exceed `to_beat`.
int CountInliersAbove(const Eigen::Matrix3d& f, std::span<const Eigen::Vector2d> pa,
                      std::span<const Eigen::Vector2d> pb, double threshold, int to_beat) {
  int count = 0;
  const auto n = static_cast<int>(pa.size());
  for (int i = 0; i < n; ++i) {
    if (count + (n - i) <= to_beat) return count;
    const auto k = static_cast<std::size_t>(i);
    if (EpipolarErrorPx(f, pa[k], pb[k]) <= threshold) ++count;
  }
  return count;
}

}  // namespace

void RansacConfig::Validate() const {
  if (!(threshold_px > 0.0) || !std::isfinite(threshold_px)) {
    Fail(ErrorCode::kInvalidParameter, "RANSAC threshold must be positive");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    Fail(ErrorCode::kInvalidParameter, "RANSAC confidence must lie in (0, 1)");
  }
  if (max_iterations < 1) Fail(ErrorCode::kInvalidParameter, "RANSAC needs at least one iteration");
}

int AdaptiveIterationCount(double inlier_ratio, int sample_size, double confidence,
                           int max_iterations) {
  if (!(inlier_ratio > 0.0)) return max_iterations;
  const double p_good = std::pow(std::min(inlier_ratio, 1.0), sample_size);
  if (p_good >= 1.0) return 1;
  const double denom = std::log1p(-p_good);
  if (denom == 0.0) return max_iterations;
  const double n = std::ceil(std::log1p(-confidence) / denom);
  if (!(n < static_cast<double>(max_iterations))) return max_iterations;
  return std::max(1, static_cast<int>(n));
}

Eigen::Matrix3d ProjectToEssential(const Eigen::Matrix3d& e) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = 0.5 * (svd.singularValues()[0] + svd.singularValues()[1]);
  return svd.matrixU() * Eigen::Vector3d(s, s, 0.0).asDiagonal() * svd.matrixV().transpose();
}

std::optional<Eigen::Matrix3d> SolveEssentialLinear(std::span<const Eigen::Vector2d> xa,
                                                    std::span<const Eigen::Vector2d> xb) {
  if (xa.size() != xb.size() || xa.size() < kEssentialSample) return std::nullopt;
  const Eigen::Matrix3d ta = detail::ConditioningTransform(xa);
  const Eigen::Matrix3d tb = detail::ConditioningTransform(xb);
  auto row = [&](std::size_t i) {
    const Eigen::Vector2d p = detail::ApplyTransform(ta, xa[i]);
    const Eigen::Vector2d q = detail::ApplyTransform(tb, xb[i]);
    Eigen::Matrix<double, 1, 9> r;
    r << q.x() * p.x(), q.x() * p.y(), q.x(), q.y() * p.x(), q.y() * p.y(), q.y(), p.x(), p.y(),
        1.0;
    return r;
  };
  Eigen::Matrix<double, 9, 1> v;
  if (xa.size() == kEssentialSample) {
    // Minimal samples: the null vector is the last column of Q in the QR
    // factorisation of the transposed 8x9 system.
    Eigen::Matrix<double, 9, kEssentialSample> at;
    for (std::size_t i = 0; i < xa.size(); ++i) at.col(static_cast<Eigen::Index>(i)) = row(i).transpose();
    const Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 9, kEssentialSample>> qr(at);
    const auto& r = qr.matrixQR();
    if (!(std::abs(r(0, 0)) > 0.0) || std::abs(r(7, 7)) < 1e-12 * std::abs(r(0, 0))) {
      return std::nullopt;
    }
    v = qr.householderQ() * Eigen::Matrix<double, 9, 1>::Unit(8);
  } else {
    Eigen::Matrix<double, Eigen::Dynamic, 9> a(static_cast<Eigen::Index>(xa.size()), 9);
    for (std::size_t i = 0; i < xa.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = row(i);
    Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 9>> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv[0] > 0.0) || sv[7] < 1e-12 * sv[0]) return std::nullopt;
    v = svd.matrixV().col(8);
  }
  Eigen::Matrix3d e;
  e << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  // The essential structure only exists in calibrated coordinates, so it is
  // imposed after undoing the conditioning.
  e = tb.transpose() * e * ta;
  e = ProjectToEssential(e);
  const double norm = e.norm();
  if (!(norm > 0.0) || !e.allFinite()) return std::nullopt;
  return Eigen::Matrix3d(e / norm);
}

Eigen::Matrix3d FundamentalFromEssential(const Eigen::Matrix3d& e, const CameraIntrinsics& k_a,
                                         const CameraIntrinsics& k_b) {
  return k_b.KInverse().transpose() * e * k_a.KInverse();
}

double EpipolarErrorPx(const Eigen::Matrix3d& f, const Eigen::Vector2d& pa,
                       const Eigen::Vector2d& pb) {
  const Eigen::Vector3d a(pa.x(), pa.y(), 1.0);
  const Eigen::Vector3d b(pb.x(), pb.y(), 1.0);
  const Eigen::Vector3d line_b = f * a;
  const Eigen::Vector3d line_a = f.transpose() * b;
  const double residual = b.dot(line_b);
  const double na = line_a.head<2>().squaredNorm();
  const double nb = line_b.head<2>().squaredNorm();
  if (!(na > 0.0) || !(nb > 0.0)) return std::numeric_limits<double>::infinity();
  return std::abs(residual) * std::sqrt(0.5 * (1.0 / na + 1.0 / nb));
}

void DecomposeEssential(const Eigen::Matrix3d& e, std::span<const Eigen::Vector2d> xa,
                        std::span<const Eigen::Vector2d> xb, Eigen::Matrix3d* rotation,
                        Eigen::Vector3d* translation) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;
  Eigen::Matrix3d w;
  w << 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3d rotations[2] = {u * w * v.transpose(), u * w.transpose() * v.transpose()};
  const Eigen::Vector3d t = u.col(2).normalized();
  int best_votes = -1;
  for (int ri = 0; ri < 2; ++ri) {
    for (int sign = 0; sign < 2; ++sign) {
      const Eigen::Vector3d tc = sign == 0 ? t : Eigen::Vector3d(-t);
      int votes = 0;
      for (std::size_t i = 0; i < xa.size(); ++i) {
        if (InFrontOfBoth(rotations[ri], tc, xa[i], xb[i])) ++votes;
      }
      if (votes > best_votes) {
        best_votes = votes;
        *rotation = rotations[ri];
        *translation = tc;
      }
    }
  }
  // Re-orthonormalise.
  Eigen::JacobiSVD<Eigen::Matrix3d> rsvd(*rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  *rotation = rsvd.matrixU() * rsvd.matrixV().transpose();
}

PoseEstimate EstimateEssential(std::span<const Eigen::Vector2d> pts_a,
                               std::span<const Eigen::Vector2d> pts_b,
                               const CameraIntrinsics& k_a, const CameraIntrinsics& k_b,
                               const RansacConfig& config) {
  config.Validate();
  k_a.Validate();
  k_b.Validate();
  if (pts_a.size() != pts_b.size()) {
    Fail(ErrorCode::kDimensionMismatch, "correspondence lists differ in length");
  }
  const int n = static_cast<int>(pts_a.size());
  if (n < kEssentialSample) {
    Fail(ErrorCode::kInsufficientMatches, "essential matrix needs at least 8 matches");
  }
  std::vector<Eigen::Vector2d> xa(pts_a.size());
  std::vector<Eigen::Vector2d> xb(pts_b.size());
  const Eigen::Matrix3d ka_inv = k_a.KInverse();
  const Eigen::Matrix3d kb_inv = k_b.KInverse();
  for (std::size_t i = 0; i < pts_a.size(); ++i) {
    xa[i] = detail::ApplyTransform(ka_inv, pts_a[i]);
    xb[i] = detail::ApplyTransform(kb_inv, pts_b[i]);
  }

  Eigen::Matrix3d best_e = Eigen::Matrix3d::Zero();
  int best_count = -1;
  int limit = config.max_iterations;
  int iteration = 0;
  std::array<Eigen::Vector2d, kEssentialSample> sa;
  std::array<Eigen::Vector2d, kEssentialSample> sb;
  std::mt19937_64 rng(config.seed);
  for (; iteration < limit; ++iteration) {
    const auto sample = detail::SampleDistinct<kEssentialSample>(n, rng);
    for (int k = 0; k < kEssentialSample; ++k) {
      sa[static_cast<std::size_t>(k)] = xa[static_cast<std::size_t>(sample[static_cast<std::size_t>(k)])];
      sb[static_cast<std::size_t>(k)] = xb[static_cast<std::size_t>(sample[static_cast<std::size_t>(k)])];
    }
    const auto e = SolveEssentialLinear(sa, sb);
    if (!e) continue;
    int count = CountInliersAbove(FundamentalFromEssential(*e, k_a, k_b), pts_a, pts_b,
                                  config.threshold_px, best_count);
    if (count > best_count) {
      best_count = count;
      best_e = *e;
      // Local optimisation: refit on the support under a wider gate while
      // that keeps gaining inliers at the real threshold. A minimal sample
      // of noisy points rarely lands on the best model by itself.
      for (int round = 0; round < kLocalRounds && best_count >= kEssentialSample; ++round) {
        std::vector<std::uint8_t> wide;
        CountInliers(FundamentalFromEssential(best_e, k_a, k_b), pts_a, pts_b,
                     kLocalGate * config.threshold_px, &wide);
        std::vector<Eigen::Vector2d> la;
        std::vector<Eigen::Vector2d> lb;
        for (std::size_t i = 0; i < wide.size(); ++i) {
          if (wide[i]) {
            la.push_back(xa[i]);
            lb.push_back(xb[i]);
          }
        }
        const auto refit = SolveEssentialLinear(la, lb);
        if (!refit) break;
        count = CountInliers(FundamentalFromEssential(*refit, k_a, k_b), pts_a, pts_b,
                             config.threshold_px, nullptr);
        if (count <= best_count) break;
        best_count = count;
        best_e = *refit;
      }
      limit = std::min(limit, AdaptiveIterationCount(static_cast<double>(best_count) / n,
                                                     kEssentialSample, config.confidence,
                                                     config.max_iterations));
    }
  }
  if (best_count < kEssentialSample) {
    Fail(ErrorCode::kDegenerateConfiguration, "no essential matrix hypothesis with 8 inliers");
  }

  std::vector<std::uint8_t> mask;
  CountInliers(FundamentalFromEssential(best_e, k_a, k_b), pts_a, pts_b, config.threshold_px, &mask);
  for (int refit = 0; refit < kMaxRefits; ++refit) {
    std::vector<Eigen::Vector2d> ia;
    std::vector<Eigen::Vector2d> ib;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) {
        ia.push_back(xa[i]);
        ib.push_back(xb[i]);
      }
    }
    const auto e = SolveEssentialLinear(ia, ib);
    if (!e) break;
    std::vector<std::uint8_t> next;
    const int count = CountInliers(FundamentalFromEssential(*e, k_a, k_b), pts_a, pts_b,
                                   config.threshold_px, &next);
    if (count < best_count) break;
    const bool stable = next == mask;
    best_e = *e;
    best_count = count;
    mask = std::move(next);
    if (stable) break;
  }

  PoseEstimate pose;
  pose.iterations = iteration;
  auto inliers_of = [&](const std::vector<std::uint8_t>& m, std::span<const Eigen::Vector2d> from) {
    std::vector<Eigen::Vector2d> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) out.push_back(from[i]);
    }
    return out;
  };
  DecomposeEssential(best_e, inliers_of(mask, xa), inliers_of(mask, xb), &pose.rotation,
                     &pose.translation_dir);

  // Nonlinear polish of (R, t). The support is taken under a wider gate:
  // at a tight threshold the surviving residuals are a truncated sample of
  // the noise, which biases a fit restricted to them.
  std::vector<std::uint8_t> support;
  CountInliers(FundamentalFromEssential(best_e, k_a, k_b), pts_a, pts_b,
               kPolishGate * config.threshold_px, &support);
  for (int pass = 0; pass < kMaxRefits; ++pass) {
    Eigen::Matrix3d r = pose.rotation;
    Eigen::Vector3d t = pose.translation_dir;
    RefinePose(inliers_of(support, pts_a), inliers_of(support, pts_b), k_a, k_b, &r, &t);
    const Eigen::Matrix3d e = Skew(t) * r;
    std::vector<std::uint8_t> next;
    CountInliers(FundamentalFromEssential(e / e.norm(), k_a, k_b), pts_a, pts_b,
                 kPolishGate * config.threshold_px, &next);
    pose.rotation = r;
    pose.translation_dir = t;
    best_e = e / e.norm();
    const bool stable = next == support;
    support = std::move(next);
    if (stable) break;
  }
  best_count = CountInliers(FundamentalFromEssential(best_e, k_a, k_b), pts_a, pts_b,
                            config.threshold_px, &mask);
  pose.essential = best_e;
  pose.inlier_mask = mask;
  pose.inlier_count = best_count;
  if ((pose.rotation.transpose() * pose.rotation - Eigen::Matrix3d::Identity()).norm() >= 1e-9) {
    Fail(ErrorCode::kDegenerateConfiguration, "recovered rotation is not orthonormal");
  }
  return pose;
}

}  // namespace rectmatch
