#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "camnav/camera.hpp"
#include "camnav/geometry.hpp"

namespace camnav {

enum class MarkerColor : std::uint8_t { kBackground = 0, kGreen = 1, kOrange = 2 };

/// Categorical camera frame: one color label per pixel, row-major.
/// Pixel (col, row) has its center at frame coordinates (col, row).
class SyntheticFrame {
 public:
  using LabelGrid =
      Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SyntheticFrame(int width, int height);

  int width() const { return static_cast<int>(labels_.cols()); }
  int height() const { return static_cast<int>(labels_.rows()); }

  MarkerColor at(int col, int row) const {
    return static_cast<MarkerColor>(labels_(row, col));
  }
  void set(int col, int row, MarkerColor c) {
    labels_(row, col) = static_cast<std::uint8_t>(c);
  }

  const LabelGrid& labels() const { return labels_; }

  bool operator==(const SyntheticFrame& other) const {
    return labels_.rows() == other.labels_.rows() &&
           labels_.cols() == other.labels_.cols() &&
           (labels_ == other.labels_).all();
  }

 private:
  LabelGrid labels_;
};

struct MarkerPixelSet {
  MarkerColor color = MarkerColor::kGreen;
  std::vector<PixelPoint> pixels;
};

/// Marker discs in the robot body frame: x forward, y lateral (meters).
struct MarkerLayout {
  Vec2<double> green_offset{-0.05, 0.0};
  Vec2<double> orange_offset{0.05, 0.0};
  double disc_radius = 0.02;

  void validate() const;
};

/// Draws both marker discs as seen by `camera`. Each disc center gets an
/// independent Gaussian jitter (pixels) drawn from `seed`; pixels outside the
/// frame are clipped.
SyntheticFrame render_markers(const CameraModel& camera, const Pose2D& robot,
                              const MarkerLayout& layout,
                              double pixel_noise_std, std::uint64_t seed);

/// All pixels carrying `color`, in frame coordinates.
MarkerPixelSet segment_color(const SyntheticFrame& frame, MarkerColor color);

/// Segmentation -> centroids -> image pose -> world pose.
Pose2D locate_robot(const CameraModel& camera, const SyntheticFrame& frame);

/// Text form: header `CNLF <width> <height>` then one line per row using
/// '.' background, 'g' green, 'o' orange.
void write_frame(std::ostream& out, const SyntheticFrame& frame);
SyntheticFrame read_frame(std::istream& in);
std::string frame_to_string(const SyntheticFrame& frame);

}  // namespace camnav
