#include "camnav/vision.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "camnav/rng.hpp"

namespace camnav {

SyntheticFrame::SyntheticFrame(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "frame: dimensions must be positive");
  }
  labels_ = LabelGrid::Zero(height, width);
}

void MarkerLayout::validate() const {
  if (!(disc_radius > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "marker layout: disc radius must be positive");
  }
  if (green_offset == orange_offset) {
    throw Error(ErrorCode::kInvalidArgument, "marker layout: offsets must differ");
  }
}

namespace {

void fill_disc(SyntheticFrame& frame, const Vec2<double>& center, double radius,
               MarkerColor color) {
  const int col_lo = std::max(0, static_cast<int>(std::ceil(center.x() - radius)));
  const int col_hi =
      std::min(frame.width() - 1, static_cast<int>(std::floor(center.x() + radius)));
  const int row_lo = std::max(0, static_cast<int>(std::ceil(center.y() - radius)));
  const int row_hi =
      std::min(frame.height() - 1, static_cast<int>(std::floor(center.y() + radius)));
  const double r2 = radius * radius;
  for (int row = row_lo; row <= row_hi; ++row) {
    const double dy = row - center.y();
    for (int col = col_lo; col <= col_hi; ++col) {
      const double dx = col - center.x();
      if (dx * dx + dy * dy <= r2) frame.set(col, row, color);
    }
  }
}

}  // namespace

SyntheticFrame render_markers(const CameraModel& camera, const Pose2D& robot,
                              const MarkerLayout& layout, double pixel_noise_std,
                              std::uint64_t seed) {
  camera.validate();
  layout.validate();
  SyntheticFrame frame(camera.image_width, camera.image_height);
  Rng rng(seed);
  const double radius_px = layout.disc_radius * camera.scale;

  auto disc_center = [&](const Vec2<double>& offset) {
    Vec2<double> c = to_frame(camera, project(camera, robot.body_to_world(offset)));
    if (pixel_noise_std > 0) {
      // Two draws per disc, always consumed in the same order.
      const double du = rng.gaussian(0.0, pixel_noise_std);
      const double dv = rng.gaussian(0.0, pixel_noise_std);
      c += Vec2<double>(du, dv);
    }
    return c;
  };
  const Vec2<double> green = disc_center(layout.green_offset);
  const Vec2<double> orange = disc_center(layout.orange_offset);
  fill_disc(frame, green, radius_px, MarkerColor::kGreen);
  fill_disc(frame, orange, radius_px, MarkerColor::kOrange);
  return frame;
}

MarkerPixelSet segment_color(const SyntheticFrame& frame, MarkerColor color) {
  MarkerPixelSet out;
  out.color = color;
  const auto label = static_cast<std::uint8_t>(color);
  const auto& grid = frame.labels();
  const std::uint8_t* data = grid.data();
  const int w = frame.width();
  const Eigen::Index n = grid.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data[i] == label) {
      out.pixels.emplace_back(static_cast<double>(i % w), static_cast<double>(i / w));
    }
  }
  if (out.pixels.empty()) {
    throw Error(ErrorCode::kMarkerNotDetected,
                color == MarkerColor::kGreen ? "segment: no green pixels"
                                             : "segment: no orange pixels");
  }
  return out;
}

Pose2D locate_robot(const CameraModel& camera, const SyntheticFrame& frame) {
  const MarkerPixelSet green = segment_color(frame, MarkerColor::kGreen);
  const MarkerPixelSet orange = segment_color(frame, MarkerColor::kOrange);
  const PixelPoint g = from_frame(camera, centroid<double>(green.pixels));
  const PixelPoint o = from_frame(camera, centroid<double>(orange.pixels));
  return world_pose(camera, image_pose(g, o));
}

void write_frame(std::ostream& out, const SyntheticFrame& frame) {
  out << "CNLF " << frame.width() << ' ' << frame.height() << '\n';
  std::string line(static_cast<std::size_t>(frame.width()), '.');
  for (int row = 0; row < frame.height(); ++row) {
    for (int col = 0; col < frame.width(); ++col) {
      switch (frame.at(col, row)) {
        case MarkerColor::kBackground: line[col] = '.'; break;
        case MarkerColor::kGreen: line[col] = 'g'; break;
        case MarkerColor::kOrange: line[col] = 'o'; break;
      }
    }
    out << line << '\n';
  }
}

SyntheticFrame read_frame(std::istream& in) {
  std::string magic;
  int width = 0;
  int height = 0;
  if (!(in >> magic >> width >> height) || magic != "CNLF") {
    throw Error(ErrorCode::kIo, "read_frame: bad header");
  }
  SyntheticFrame frame(width, height);
  std::string line;
  std::getline(in, line);  // rest of header line
  for (int row = 0; row < height; ++row) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) != width) {
      throw Error(ErrorCode::kIo, "read_frame: short row " + std::to_string(row));
    }
    for (int col = 0; col < width; ++col) {
      switch (line[col]) {
        case '.': break;
        case 'g': frame.set(col, row, MarkerColor::kGreen); break;
        case 'o': frame.set(col, row, MarkerColor::kOrange); break;
        default:
          throw Error(ErrorCode::kIo, "read_frame: unknown label character");
      }
    }
  }
  return frame;
}

std::string frame_to_string(const SyntheticFrame& frame) {
  std::ostringstream os;
  write_frame(os, frame);
  return os.str();
}

}  // namespace camnav
