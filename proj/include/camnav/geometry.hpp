#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "camnav/error.hpp"

namespace camnav {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Wraps an angle into (-pi, pi]. The +/-pi tie resolves to +pi.
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  using std::isfinite;
  if (!isfinite(angle)) {
    throw Error(ErrorCode::kNonFinite, "wrap_angle: non-finite angle");
  }
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  constexpr Scalar kTwoPi = 2 * kPi;
  Scalar r = std::fmod(angle, kTwoPi);  // (-2pi, 2pi), sign of angle
  if (r > kPi) r -= kTwoPi;
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Smallest signed rotation taking `b` onto `a`.
template <typename Scalar>
Scalar angle_diff(Scalar a, Scalar b) {
  using std::isfinite;
  if (!isfinite(a) || !isfinite(b)) {
    throw Error(ErrorCode::kNonFinite, "angle_diff: non-finite angle");
  }
  return wrap_angle(a - b);
}

namespace detail {

// Strong 2-vector: behaves like an Eigen vector in expressions, but only
// converts from an expression explicitly, so world and pixel coordinates
// cannot be swapped silently at API boundaries.
template <typename Scalar, typename Tag>
class StrongVec2 : public Vec2<Scalar> {
 public:
  using Base = Vec2<Scalar>;

  StrongVec2() : Base(Base::Zero()) {}
  StrongVec2(Scalar a, Scalar b) : Base(a, b) {}

  template <typename OtherDerived>
  explicit StrongVec2(const Eigen::MatrixBase<OtherDerived>& other)
      : Base(other) {}

  template <typename OtherDerived>
  StrongVec2& operator=(const Eigen::MatrixBase<OtherDerived>& other) {
    this->Base::operator=(other);
    return *this;
  }

  const Base& vec() const { return *this; }
};

struct WorldTag {};
struct PixelTag {};

}  // namespace detail

/// Floor-plane point in meters.
template <typename Scalar>
class WorldPointT : public detail::StrongVec2<Scalar, detail::WorldTag> {
 public:
  using detail::StrongVec2<Scalar, detail::WorldTag>::StrongVec2;
  using detail::StrongVec2<Scalar, detail::WorldTag>::operator=;
};

/// Image-plane point in pixels, relative to the principal point. Sub-pixel
/// values are normal (centroids).
template <typename Scalar>
class PixelPointT : public detail::StrongVec2<Scalar, detail::PixelTag> {
 public:
  using detail::StrongVec2<Scalar, detail::PixelTag>::StrongVec2;
  using detail::StrongVec2<Scalar, detail::PixelTag>::operator=;

  Scalar u() const { return this->x(); }
  Scalar v() const { return this->y(); }
};

/// Planar robot pose. Heading is the marker azimuth: measured from the +Y
/// world axis toward +X, so the robot moves along (sin theta, cos theta).
/// Theta is kept in (-pi, pi].
template <typename Scalar>
class Pose2T {
 public:
  Pose2T() = default;
  Pose2T(Scalar x, Scalar y, Scalar theta)
      : position_(x, y), theta_(wrap_angle(theta)) {}
  Pose2T(const WorldPointT<Scalar>& position, Scalar theta)
      : position_(position), theta_(wrap_angle(theta)) {}

  const WorldPointT<Scalar>& position() const { return position_; }
  Scalar x() const { return position_.x(); }
  Scalar y() const { return position_.y(); }
  Scalar theta() const { return theta_; }

  void set_position(const WorldPointT<Scalar>& p) { position_ = p; }
  void set_theta(Scalar theta) { theta_ = wrap_angle(theta); }

  /// Unit vector along the heading.
  Vec2<Scalar> forward() const {
    return Vec2<Scalar>(std::sin(theta_), std::cos(theta_));
  }

  /// Maps a body-frame offset (forward, lateral-toward-+theta side) to world.
  WorldPointT<Scalar> body_to_world(const Vec2<Scalar>& body) const {
    const Scalar s = std::sin(theta_);
    const Scalar c = std::cos(theta_);
    // Lateral axis is the forward axis rotated by +pi/2 in the heading sense.
    const Vec2<Scalar> lateral(c, -s);
    return WorldPointT<Scalar>(position_ + body.x() * forward() +
                               body.y() * lateral);
  }

  bool operator==(const Pose2T& other) const {
    return position_.vec() == other.position_.vec() && theta_ == other.theta_;
  }

 private:
  WorldPointT<Scalar> position_;
  Scalar theta_ = 0;
};

/// Heading (azimuth convention) of the ray from `from` to `to`.
template <typename Scalar>
Scalar bearing(const WorldPointT<Scalar>& from, const WorldPointT<Scalar>& to) {
  const Vec2<Scalar> d = to - from;
  return std::atan2(d.x(), d.y());
}

/// 2D cross product a.x*b.y - a.y*b.x.
template <typename DerivedA, typename DerivedB>
auto cross2(const Eigen::MatrixBase<DerivedA>& a,
            const Eigen::MatrixBase<DerivedB>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

using WorldPoint = WorldPointT<double>;
using PixelPoint = PixelPointT<double>;
using Pose2D = Pose2T<double>;

}  // namespace camnav
