#pragma once

#include <cmath>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "camnav/camera.hpp"
#include "camnav/error.hpp"
#include "camnav/geometry.hpp"

namespace camnav {

template <typename Scalar>
struct CalibrationPairT {
  WorldPointT<Scalar> world;
  PixelPointT<Scalar> pixel;
};

template <typename Scalar>
using CalibrationSetT = std::vector<CalibrationPairT<Scalar>>;

template <typename Scalar>
struct CalibrationResultT {
  CameraModelT<Scalar> camera;
  Scalar residual_rms = 0;  // pixels, per-point Euclidean
};

/// Relative LDLT pivot below which the normal matrix counts as singular.
inline constexpr double kCalibrationPivotTolerance = 1e-12;

/// Least-squares fit of the pinhole relation u = s*(X - Cx), v = s*(Y - Cy).
/// Substituting a = s*Cx, b = s*Cy makes it linear in (s, a, b):
///   u_i = s*X_i - a,  v_i = s*Y_i - b.
/// Frame dimensions are not observable here and are passed through.
template <typename Scalar>
CalibrationResultT<Scalar> calibrate(const CalibrationSetT<Scalar>& pairs,
                                     int image_width = 640,
                                     int image_height = 480) {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  using Row3 = Eigen::Matrix<Scalar, 1, 3>;

  if (pairs.size() < 2) {
    throw Error(ErrorCode::kTooFewPoints, "calibrate: need at least 2 pairs");
  }

  Mat3 normal = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (const auto& p : pairs) {
    const Row3 row_u(p.world.x(), Scalar(-1), Scalar(0));
    const Row3 row_v(p.world.y(), Scalar(0), Scalar(-1));
    normal.noalias() += row_u.transpose() * row_u + row_v.transpose() * row_v;
    rhs.noalias() += row_u.transpose() * p.pixel.u() + row_v.transpose() * p.pixel.v();
  }

  const Eigen::LDLT<Mat3> ldlt(normal);
  const Vec3 pivots = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || !(pivots.maxCoeff() > 0) ||
      pivots.minCoeff() < Scalar(kCalibrationPivotTolerance) * pivots.maxCoeff()) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "calibrate: world points do not constrain the model");
  }
  const Vec3 params = ldlt.solve(rhs);
  const Scalar s = params(0);
  if (!(s > 0)) {
    throw Error(ErrorCode::kNonPositiveScale, "calibrate: fitted scale <= 0");
  }

  CalibrationResultT<Scalar> result;
  result.camera.scale = s;
  result.camera.origin_x = params(1) / s;
  result.camera.origin_y = params(2) / s;
  result.camera.image_width = image_width;
  result.camera.image_height = image_height;

  Scalar sq = 0;
  for (const auto& p : pairs) {
    sq += (project(result.camera, p.world) - p.pixel).squaredNorm();
  }
  result.residual_rms = std::sqrt(sq / Scalar(pairs.size()));
  return result;
}

using CalibrationPair = CalibrationPairT<double>;
using CalibrationSet = CalibrationSetT<double>;
using CalibrationResult = CalibrationResultT<double>;

/// Pairs file: one `X Y u v` per line, '#' starts a comment.
CalibrationSet read_calibration_pairs(std::istream& in);

}  // namespace camnav
