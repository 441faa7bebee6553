#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "camnav/controller.hpp"
#include "camnav/geometry.hpp"

namespace camnav {

struct GoalSteerConfig {
  double accept_radius = 0.1;     // m
  double align_tolerance = 0.087; // rad (5 deg)
  double turn_speed = kDefaultCommandSpeed;     // rad/s, wheel
  double forward_speed = kDefaultCommandSpeed;  // rad/s, wheel

  void validate() const;
};

struct TrackerConfig {
  double theta_d = 0.15;  // m, deviation that triggers pure rotation
  double v_m = 0.5;       // rad/s, baseline wheel speed
  double kp_t = 70.0;     // (rad/s) per m
  double end_radius = 0.1;  // m, distance to the final point that ends tracking
  // Distance ahead of the wheel axle (along the heading) of the point whose
  // deviation is regulated; 0.05 is the leading marker of the default layout.
  double lookahead = 0.05;

  void validate() const;
};

/// Ordered target trajectory samples; at least two, consecutive ones distinct.
class Track {
 public:
  explicit Track(std::vector<WorldPoint> points);

  const std::vector<WorldPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const WorldPoint& operator[](std::size_t i) const { return points_[i]; }
  const WorldPoint& back() const { return points_.back(); }

  /// Direction of travel at sample i (central difference, one-sided at ends).
  Vec2<double> tangent(std::size_t i) const;

 private:
  std::vector<WorldPoint> points_;
};

enum class NavPhase { kAligning, kAdvancing, kDone };

struct SteerOutput {
  MotorCommand command;
  NavPhase phase;
};

/// Turn toward the goal, then drive forward until inside the acceptance
/// radius. While advancing, a bearing error above twice the tolerance sends
/// the robot back to aligning.
SteerOutput steer_step(const Pose2D& pose, const WorldPoint& goal, NavPhase phase,
                       const GoalSteerConfig& cfg);

struct TrackProjection {
  std::size_t index = 0;
  double delta_d = 0;  // m
  int delta = 1;       // +1 right of the direction of travel, -1 left
};

/// Brute-force nearest sample (lowest index on ties). Side from the sign of
/// cross(tangent, p - nearest): positive is left (-1), otherwise right (+1).
TrackProjection nearest_track_point(const WorldPoint& p, const Track& track);

/// Wheel speeds from a known deviation: proportional steering, or a pure
/// rotation once the deviation exceeds theta_d.
WheelSpeeds tracker_law(double delta_d, int delta, const TrackerConfig& cfg);

/// One tracker iteration; emits stop once the robot is within end_radius of
/// the last sample.
MotorCommand tracker_step(const Pose2D& pose, const Track& track,
                          const TrackerConfig& cfg);

enum class SineKind { kHalf, kThreeQuarter, kFull };

/// Samples (x, A sin(2 pi p x / span)) on x in [0, span], p in {1/2, 3/4, 1}.
Track gen_sine_track(SineKind kind, double amplitude, double span, std::size_t samples);

/// Uniform samples on the segment a -> b.
Track gen_line_track(const WorldPoint& a, const WorldPoint& b, std::size_t samples);

/// Track file: one `X Y` per line (meters), '#' comments.
Track read_track(std::istream& in);
void write_track(std::ostream& out, const Track& track);

}  // namespace camnav
