#pragma once

#include <cmath>
#include <span>

#include <Eigen/Core>

#include "camnav/error.hpp"
#include "camnav/geometry.hpp"

namespace camnav {

/// Down-looking pinhole camera with its image plane parallel to the floor.
/// Only the ratio scale = f/Z is identifiable from floor correspondences.
template <typename Scalar>
struct CameraModelT {
  Scalar scale = 160;      // pixels per meter (f/Z)
  Scalar origin_x = 2.0;   // world point under the principal point, meters
  Scalar origin_y = 1.5;
  int image_width = 640;
  int image_height = 480;

  WorldPointT<Scalar> origin() const { return {origin_x, origin_y}; }

  /// Frame-grid coordinates of the principal point.
  Vec2<Scalar> principal_point() const {
    return Vec2<Scalar>(Scalar(image_width) / 2, Scalar(image_height) / 2);
  }

  void validate() const {
    using std::isfinite;
    if (!(scale > 0) || !isfinite(scale) || !isfinite(origin_x) ||
        !isfinite(origin_y)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "camera: scale must be positive and finite");
    }
    if (image_width <= 0 || image_height <= 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "camera: image dimensions must be positive");
    }
  }
};

template <typename Scalar>
struct ImagePoseT {
  PixelPointT<Scalar> position;
  Scalar azimuth = 0;
};

template <typename Scalar>
PixelPointT<Scalar> project(const CameraModelT<Scalar>& camera,
                            const WorldPointT<Scalar>& world) {
  return PixelPointT<Scalar>(camera.scale * (world - camera.origin()));
}

template <typename Scalar>
WorldPointT<Scalar> unproject(const CameraModelT<Scalar>& camera,
                              const PixelPointT<Scalar>& pixel) {
  return WorldPointT<Scalar>(pixel / camera.scale + camera.origin());
}

/// Image-plane point -> frame-grid coordinates (shift by principal point).
template <typename Scalar>
Vec2<Scalar> to_frame(const CameraModelT<Scalar>& camera,
                      const PixelPointT<Scalar>& pixel) {
  return pixel + camera.principal_point();
}

template <typename Scalar>
PixelPointT<Scalar> from_frame(const CameraModelT<Scalar>& camera,
                               const Vec2<Scalar>& frame_xy) {
  return PixelPointT<Scalar>(frame_xy - camera.principal_point());
}

/// Arithmetic mean of a marker's pixel coordinates.
template <typename Scalar>
PixelPointT<Scalar> centroid(std::span<const PixelPointT<Scalar>> pixels) {
  if (pixels.empty()) {
    throw Error(ErrorCode::kMarkerNotDetected, "centroid: no marker pixels");
  }
  Vec2<Scalar> sum = Vec2<Scalar>::Zero();
  for (const auto& p : pixels) sum += p;
  return PixelPointT<Scalar>(sum / Scalar(pixels.size()));
}

/// Robot position is the midpoint of the two marker centroids; azimuth is
/// atan2(du, dv) of the green->orange vector, i.e. the full-quadrant form of
/// arctan(du / dv).
template <typename Scalar>
ImagePoseT<Scalar> image_pose(const PixelPointT<Scalar>& green,
                              const PixelPointT<Scalar>& orange) {
  const Vec2<Scalar> d = orange - green;
  if (d.x() == 0 && d.y() == 0) {
    throw Error(ErrorCode::kDegenerateOrientation,
                "image_pose: coincident marker centroids");
  }
  ImagePoseT<Scalar> out;
  out.position = PixelPointT<Scalar>((green + orange) / 2);
  out.azimuth = wrap_angle(std::atan2(d.x(), d.y()));
  return out;
}

/// The image plane is parallel to the floor, so the azimuth carries over
/// unchanged.
template <typename Scalar>
Pose2T<Scalar> world_pose(const CameraModelT<Scalar>& camera,
                          const ImagePoseT<Scalar>& img) {
  return Pose2T<Scalar>(unproject(camera, img.position), img.azimuth);
}

using CameraModel = CameraModelT<double>;
using ImagePose = ImagePoseT<double>;

}  // namespace camnav
