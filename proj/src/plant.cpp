#include "camnav/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace camnav {

void RobotParams::validate() const {
  if (!(wheel_radius > 0) || !(track_width > 0) || !(max_wheel_speed > 0) ||
      !(motor_time_constant > 0) || !(encoder_ticks_per_rev > 0) ||
      !(pwm_full_scale > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "robot params must be strictly positive");
  }
}

namespace {

double relax(double omega, double pwm, bool stalled, const RobotParams& p, double dt) {
  if (stalled) return 0.0;
  const double duty = std::clamp(pwm, -p.pwm_full_scale, p.pwm_full_scale) / p.pwm_full_scale;
  const double target = duty * p.max_wheel_speed;
  // Exact discretisation of the first-order lag; stays between omega and
  // target for any dt, so |omega| never exceeds max_wheel_speed.
  const double a = std::exp(-dt / p.motor_time_constant);
  return target + (omega - target) * a;
}

std::int64_t ticks_for(double angle, const RobotParams& p) {
  return static_cast<std::int64_t>(
      std::trunc(angle * p.encoder_ticks_per_rev / (2.0 * std::numbers::pi)));
}

}  // namespace

PlantState step_plant(const PlantState& state, const RobotParams& params,
                      double pwm_right, double pwm_left, double dt) {
  if (!(dt > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "step_plant: dt must be positive");
  }
  PlantState next = state;
  next.omega_right = relax(state.omega_right, pwm_right, state.stalled_right, params, dt);
  next.omega_left = relax(state.omega_left, pwm_left, state.stalled_left, params, dt);

  const double r = params.wheel_radius;
  const double v = r * (next.omega_right + next.omega_left) / 2.0;
  const double w = r * (next.omega_right - next.omega_left) / params.track_width;
  const Pose2D& pose = state.pose;
  next.pose = Pose2D(WorldPoint(pose.position() + v * dt * pose.forward()),
                     pose.theta() + w * dt);

  next.wheel_angle_right += next.omega_right * dt;
  next.wheel_angle_left += next.omega_left * dt;
  next.encoder_right = ticks_for(next.wheel_angle_right, params);
  next.encoder_left = ticks_for(next.wheel_angle_left, params);
  return next;
}

WheelSpeeds read_encoders(const PlantState& state, const PlantState& prev,
                          const RobotParams& params, double dt) {
  if (!(dt > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "read_encoders: dt must be positive");
  }
  const double k = 2.0 * std::numbers::pi / (params.encoder_ticks_per_rev * dt);
  return {static_cast<double>(state.encoder_right - prev.encoder_right) * k,
          static_cast<double>(state.encoder_left - prev.encoder_left) * k};
}

PlantState set_stall(const PlantState& state, Wheel wheel, bool stalled) {
  PlantState next = state;
  if (wheel == Wheel::kRight) {
    next.stalled_right = stalled;
    if (stalled) next.omega_right = 0.0;
  } else {
    next.stalled_left = stalled;
    if (stalled) next.omega_left = 0.0;
  }
  return next;
}

}  // namespace camnav
