#include "camnav/navigation.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "camnav/format.hpp"

namespace camnav {

void GoalSteerConfig::validate() const {
  if (!(accept_radius > 0) || !(align_tolerance > 0) || !(turn_speed > 0) ||
      !(forward_speed > 0) || !(align_tolerance < std::numbers::pi / 2)) {
    throw Error(ErrorCode::kInvalidArgument, "goal steer config out of range");
  }
}

void TrackerConfig::validate() const {
  if (!(theta_d > 0) || !(v_m > 0) || !(kp_t > 0) || !(end_radius > 0) ||
      !std::isfinite(lookahead)) {
    throw Error(ErrorCode::kInvalidArgument, "tracker config out of range");
  }
}

Track::Track(std::vector<WorldPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "track: need at least 2 points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw Error(ErrorCode::kNonFinite, "track: non-finite point");
    }
    if (i > 0 && points_[i].vec() == points_[i - 1].vec()) {
      throw Error(ErrorCode::kInvalidArgument, "track: consecutive points must differ");
    }
  }
}

Vec2<double> Track::tangent(std::size_t i) const {
  const std::size_t lo = i == 0 ? 0 : i - 1;
  const std::size_t hi = i + 1 < points_.size() ? i + 1 : i;
  return points_[hi] - points_[lo];
}

SteerOutput steer_step(const Pose2D& pose, const WorldPoint& goal, NavPhase phase,
                       const GoalSteerConfig& cfg) {
  if ((goal - pose.position()).norm() < cfg.accept_radius) {
    return {MotorCommand::stop(), NavPhase::kDone};
  }
  const double err = angle_diff(bearing(pose.position(), goal), pose.theta());
  const int direction = err >= 0 ? 1 : -1;

  if (phase == NavPhase::kAdvancing && std::abs(err) > 2 * cfg.align_tolerance) {
    phase = NavPhase::kAligning;
  } else if (phase == NavPhase::kAligning && std::abs(err) <= cfg.align_tolerance) {
    phase = NavPhase::kAdvancing;
  } else if (phase == NavPhase::kDone) {
    // Goal moved away after completion: start over.
    phase = std::abs(err) <= cfg.align_tolerance ? NavPhase::kAdvancing
                                                 : NavPhase::kAligning;
  }
  if (phase == NavPhase::kAligning) {
    return {MotorCommand::turn(direction, cfg.turn_speed), phase};
  }
  return {MotorCommand::forward(cfg.forward_speed), phase};
}

TrackProjection nearest_track_point(const WorldPoint& p, const Track& track) {
  TrackProjection out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < track.size(); ++i) {
    const double d2 = (track[i] - p).squaredNorm();
    if (d2 < best) {
      best = d2;
      out.index = i;
    }
  }
  out.delta_d = std::sqrt(best);
  const double side = cross2(track.tangent(out.index), p - track[out.index]);
  out.delta = side > 0 ? -1 : 1;
  return out;
}

WheelSpeeds tracker_law(double delta_d, int delta, const TrackerConfig& cfg) {
  if (delta_d > cfg.theta_d) {
    return {-delta * cfg.v_m, delta * cfg.v_m};
  }
  const double correction = delta * cfg.kp_t * delta_d;
  return {cfg.v_m - correction, cfg.v_m + correction};
}

MotorCommand tracker_step(const Pose2D& pose, const Track& track, const TrackerConfig& cfg) {
  if ((track.back() - pose.position()).norm() < cfg.end_radius) {
    return MotorCommand::stop();
  }
  const WorldPoint reference(pose.position() + cfg.lookahead * pose.forward());
  const TrackProjection proj = nearest_track_point(reference, track);
  const WheelSpeeds u = tracker_law(proj.delta_d, proj.delta, cfg);
  return MotorCommand::speed(u.right, u.left);
}

Track gen_sine_track(SineKind kind, double amplitude, double span, std::size_t samples) {
  if (samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "sine track: need at least 2 samples");
  }
  if (!(amplitude > 0) || !(span > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "sine track: amplitude and span must be positive");
  }
  double periods = 1.0;
  switch (kind) {
    case SineKind::kHalf: periods = 0.5; break;
    case SineKind::kThreeQuarter: periods = 0.75; break;
    case SineKind::kFull: periods = 1.0; break;
  }
  std::vector<WorldPoint> pts;
  pts.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double x = span * static_cast<double>(k) / static_cast<double>(samples - 1);
    pts.emplace_back(x, amplitude * std::sin(2.0 * std::numbers::pi * periods * x / span));
  }
  return Track(std::move(pts));
}

Track gen_line_track(const WorldPoint& a, const WorldPoint& b, std::size_t samples) {
  if (samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "line track: need at least 2 samples");
  }
  std::vector<WorldPoint> pts;
  pts.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(samples - 1);
    pts.emplace_back(WorldPoint(a + f * (b - a)));
  }
  return Track(std::move(pts));
}

Track read_track(std::istream& in) {
  std::vector<WorldPoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double x, y;
    if (!(fields >> x)) continue;
    if (!(fields >> y)) {
      throw Error(ErrorCode::kIo, "track file: expected `X Y` on line " + std::to_string(lineno));
    }
    pts.emplace_back(x, y);
  }
  return Track(std::move(pts));
}

void write_track(std::ostream& out, const Track& track) {
  for (const auto& p : track.points()) {
    out << format_number(p.x()) << ' ' << format_number(p.y()) << '\n';
  }
}

}  // namespace camnav
