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

#ifndef RECTMATCH_GEOMETRY_HPP_
#define RECTMATCH_GEOMETRY_HPP_

#include <Eigen/Core>

namespace rectmatch {

// Orientation-preserving 2D affine map x -> linear * x + offset.
class AffineMap {
 public:
  AffineMap();
  // Throws kNonPositiveDeterminant when det(linear) <= 0 and
  // kInvalidParameter on non-finite entries.
  explicit AffineMap(const Eigen::Matrix2d& linear,
                     const Eigen::Vector2d& offset = Eigen::Vector2d::Zero());

  static AffineMap Identity() { return AffineMap(); }

  const Eigen::Matrix2d& linear() const noexcept { return linear_; }
  const Eigen::Vector2d& offset() const noexcept { return offset_; }

  Eigen::Vector2d Apply(const Eigen::Vector2d& p) const { return linear_ * p + offset_; }
  AffineMap Inverse() const;
  // (*this) o inner.
  AffineMap Compose(const AffineMap& inner) const;
  Eigen::Matrix3d ToMatrix3() const;
  bool IsIdentity(double tolerance = 1e-12) const;

 private:
  Eigen::Matrix2d linear_;
  Eigen::Vector2d offset_;
};

// linear = scale * R(post_rotation) * diag(tilt, 1) * R(pre_rotation).
struct AffineDecomposition {
  double scale = 1.0;
  double post_rotation = 0.0;  // [0, 2pi)
  double tilt = 1.0;           // >= 1
  double pre_rotation = 0.0;   // [0, pi)

  Eigen::Matrix2d Recompose() const;
};

// A point of the space of tilts: the quotient of affine maps by scale and
// post-rotation, in polar coordinates (log tilt, phi mod pi).
class TiltPoint {
 public:
  TiltPoint() = default;
  // Normalises phi into [0, pi); phi is forced to 0 at the origin.
  TiltPoint(double log_tilt, double phi);

  static TiltPoint Origin() { return {}; }

  double log_tilt() const noexcept { return log_tilt_; }
  double phi() const noexcept { return phi_; }
  double tilt() const;
  bool IsOrigin() const noexcept { return log_tilt_ == 0.0; }

  bool operator==(const TiltPoint&) const = default;

 private:
  double log_tilt_ = 0.0;
  double phi_ = 0.0;
};

struct RBall {
  TiltPoint center;
  double radius = 0.0;  // in log transition tilt units
};

// Singular-value ratio at or below this is treated as tilt-free.
inline constexpr double kTiltFreeRatio = 1.0 + 1e-9;

Eigen::Matrix2d Rotation2(double angle);

AffineDecomposition DecomposeLinear(const Eigen::Matrix2d& linear);
AffineDecomposition DecomposeAffine(const AffineMap& map);

TiltPoint TiltCoords(const Eigen::Matrix2d& linear);
TiltPoint TiltCoords(const AffineMap& map);

// Transition tilt tau >= 1 between two points of the space of tilts: the
// singular value ratio of diag(t_b, 1) R(phi_b - phi_a) diag(1 / t_a, 1).
double TransitionTilt(const TiltPoint& a, const TiltPoint& b);
// log of the transition tilt; the semi-metric of the space of tilts.
double TiltDistance(const TiltPoint& a, const TiltPoint& b);

// Precomputed trigonometry of a TiltPoint for bulk distance evaluation.
// TransitionTilt(TiltParts(a), TiltParts(b)) == TransitionTilt(a, b).
struct TiltParts {
  explicit TiltParts(const TiltPoint& p);
  double tilt;
  double tilt_sq_minus_one;  // t^2 - 1 without cancellation near t = 1
  double cos_phi;
  double sin_phi;
  bool origin;
};
double TransitionTilt(const TiltParts& a, const TiltParts& b);

bool RBallContains(const RBall& ball, const TiltPoint& p);

// diag(t, 1) * R(phi): the representative of `p` with unit scale and no
// post-rotation.
Eigen::Matrix2d CanonicalLinear(const TiltPoint& p);
// CanonicalLinear scaled to unit determinant.
Eigen::Matrix2d AreaPreservingLinear(const TiltPoint& p);

// Projective point transfer and its local linearisation.
Eigen::Vector2d ApplyHomography(const Eigen::Matrix3d& h, const Eigen::Vector2d& p);
Eigen::Matrix2d HomographyJacobian(const Eigen::Matrix3d& h, const Eigen::Vector2d& p);

// Singular value ratio sigma_max / sigma_min of a 2x2 matrix. Returns
// +infinity for singular input.
double SingularValueRatio(const Eigen::Matrix2d& m);

}  // namespace rectmatch

#endif  // RECTMATCH_GEOMETRY_HPP_
