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

#include "rectmatch/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <numbers>

#include "rectmatch/error.hpp"

namespace rectmatch {
namespace {

constexpr double kPi = std::numbers::pi;
// Angles closer than this are the same direction in the space of tilts.
constexpr double kAngleEpsilon = 1e-12;

double WrapToInterval(double angle, double period) {
  double wrapped = std::fmod(angle, period);
  if (wrapped < 0.0) wrapped += period;
  if (wrapped >= period) wrapped -= period;
  return wrapped;
}

}  // namespace

AffineMap::AffineMap()
    : linear_(Eigen::Matrix2d::Identity()), offset_(Eigen::Vector2d::Zero()) {}

AffineMap::AffineMap(const Eigen::Matrix2d& linear, const Eigen::Vector2d& offset)
    : linear_(linear), offset_(offset) {
  if (!linear.allFinite() || !offset.allFinite()) {
    Fail(ErrorCode::kInvalidParameter, "affine map has non-finite entries");
  }
  if (!(linear.determinant() > 0.0)) {
    Fail(ErrorCode::kNonPositiveDeterminant, "affine map must preserve orientation");
  }
}

AffineMap AffineMap::Inverse() const {
  const Eigen::Matrix2d inv = linear_.inverse();
  return AffineMap(inv, -inv * offset_);
}

AffineMap AffineMap::Compose(const AffineMap& inner) const {
  return AffineMap(linear_ * inner.linear_, linear_ * inner.offset_ + offset_);
}

Eigen::Matrix3d AffineMap::ToMatrix3() const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = linear_;
  m.topRightCorner<2, 1>() = offset_;
  return m;
}

bool AffineMap::IsIdentity(double tolerance) const {
  return (linear_ - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= tolerance &&
         offset_.cwiseAbs().maxCoeff() <= tolerance;
}

Eigen::Matrix2d AffineDecomposition::Recompose() const {
  return scale * Rotation2(post_rotation) *
         Eigen::DiagonalMatrix<double, 2>(tilt, 1.0) * Rotation2(pre_rotation);
}

TiltPoint::TiltPoint(double log_tilt, double phi) : log_tilt_(log_tilt) {
  if (!std::isfinite(log_tilt) || !std::isfinite(phi) || log_tilt < 0.0) {
    Fail(ErrorCode::kInvalidParameter, "tilt point needs finite log_tilt >= 0");
  }
  phi_ = log_tilt == 0.0 ? 0.0 : WrapToInterval(phi, kPi);
}

double TiltPoint::tilt() const { return std::exp(log_tilt_); }

Eigen::Matrix2d Rotation2(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

AffineDecomposition DecomposeLinear(const Eigen::Matrix2d& linear) {
  const double det = linear.determinant();
  if (!(det > 0.0)) {
    Fail(ErrorCode::kNonPositiveDeterminant, "cannot decompose map with det <= 0");
  }
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(linear, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector2d sv = svd.singularValues();
  if (sv(1) < 1e-12) Fail(ErrorCode::kDegenerate, "smallest singular value below 1e-12");

  AffineDecomposition out;
  if (sv(0) / sv(1) <= kTiltFreeRatio) {
    // Similarity: the pre-rotation is undefined, fold everything into psi.
    out.scale = std::sqrt(det);
    out.tilt = 1.0;
    out.pre_rotation = 0.0;
    out.post_rotation = WrapToInterval(
        std::atan2(linear(1, 0) - linear(0, 1), linear(0, 0) + linear(1, 1)), 2.0 * kPi);
    return out;
  }

  Eigen::Matrix2d u = svd.matrixU();
  Eigen::Matrix2d v = svd.matrixV();
  if (u.determinant() < 0.0) {
    // det(linear) > 0 implies both factors are reflections.
    u.col(1) *= -1.0;
    v.col(1) *= -1.0;
  }
  double psi = std::atan2(u(1, 0), u(0, 0));
  // V^T = R(phi)  =>  V = R(-phi).
  double phi = -std::atan2(v(1, 0), v(0, 0));
  phi = WrapToInterval(phi, 2.0 * kPi);
  if (phi >= kPi) {
    phi -= kPi;
    psi += kPi;
  }
  out.scale = sv(1);
  out.tilt = sv(0) / sv(1);
  out.pre_rotation = phi;
  out.post_rotation = WrapToInterval(psi, 2.0 * kPi);
  return out;
}

AffineDecomposition DecomposeAffine(const AffineMap& map) {
  return DecomposeLinear(map.linear());
}

TiltPoint TiltCoords(const Eigen::Matrix2d& linear) {
  const AffineDecomposition d = DecomposeLinear(linear);
  return TiltPoint(d.tilt == 1.0 ? 0.0 : std::log(d.tilt), d.pre_rotation);
}

TiltPoint TiltCoords(const AffineMap& map) { return TiltCoords(map.linear()); }

TiltParts::TiltParts(const TiltPoint& p)
    : tilt(p.tilt()), tilt_sq_minus_one(std::expm1(2.0 * p.log_tilt())),
      cos_phi(std::cos(p.phi())), sin_phi(std::sin(p.phi())), origin(p.IsOrigin()) {}

namespace {

// tau - 1 for the transition tilt tau. With M = diag(tb, 1) R(delta)
// diag(1 / ta, 1), tau + 1 / tau - 2 = |M|_F^2 / det(M) - 2, which expands to
// ((tb - ta)^2 + sin^2(delta) (ta^2 - 1) (tb^2 - 1)) / (ta tb). Every term is
// non-negative, so nearby points keep full relative precision. Only
// sin^2(delta) enters, so delta and delta + pi coincide.
double TransitionExcess(const TiltParts& a, const TiltParts& b) {
  if (a.origin) return b.tilt - 1.0;
  if (b.origin) return a.tilt - 1.0;
  const double sin_delta = a.sin_phi * b.cos_phi - a.cos_phi * b.sin_phi;
  const double s2 = std::abs(sin_delta) < kAngleEpsilon ? 0.0 : sin_delta * sin_delta;
  const double dt = b.tilt - a.tilt;
  const double q =
      (dt * dt + s2 * a.tilt_sq_minus_one * b.tilt_sq_minus_one) / (a.tilt * b.tilt);
  return 0.5 * (q + std::sqrt(q * q + 4.0 * q));
}

}  // namespace

double TransitionTilt(const TiltParts& a, const TiltParts& b) {
  return 1.0 + TransitionExcess(a, b);
}

double TransitionTilt(const TiltPoint& a, const TiltPoint& b) {
  return TransitionTilt(TiltParts(a), TiltParts(b));
}

double TiltDistance(const TiltPoint& a, const TiltPoint& b) {
  if (a.IsOrigin()) return b.log_tilt();
  if (b.IsOrigin()) return a.log_tilt();
  return std::log1p(TransitionExcess(TiltParts(a), TiltParts(b)));
}

bool RBallContains(const RBall& ball, const TiltPoint& p) {
  return TiltDistance(ball.center, p) <= ball.radius;
}

Eigen::Matrix2d CanonicalLinear(const TiltPoint& p) {
  return Eigen::DiagonalMatrix<double, 2>(p.tilt(), 1.0) * Rotation2(p.phi());
}

Eigen::Matrix2d AreaPreservingLinear(const TiltPoint& p) {
  return CanonicalLinear(p) / std::sqrt(p.tilt());
}

Eigen::Vector2d ApplyHomography(const Eigen::Matrix3d& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  return q.hnormalized();
}

Eigen::Matrix2d HomographyJacobian(const Eigen::Matrix3d& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  const double w = q(2);
  const Eigen::Vector2d mapped = q.head<2>() / w;
  Eigen::Matrix2d j;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) j(r, c) = (h(r, c) - mapped(r) * h(2, c)) / w;
  }
  return j;
}

double SingularValueRatio(const Eigen::Matrix2d& m) {
  const double det = std::abs(m.determinant());
  if (det == 0.0) return std::numeric_limits<double>::infinity();
  const double frob2 = m.squaredNorm();
  const double disc = std::max(0.0, (frob2 - 2.0 * det) * (frob2 + 2.0 * det));
  return std::max(1.0, (frob2 + std::sqrt(disc)) / (2.0 * det));
}

}  // namespace rectmatch
