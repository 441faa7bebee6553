#pragma once

#include <cstdint>

#include "camnav/geometry.hpp"

namespace camnav {

struct RobotParams {
  double wheel_radius = 0.03;          // m
  double track_width = 0.2;            // m
  double max_wheel_speed = 80.0;       // rad/s at full duty
  double motor_time_constant = 0.15;   // s
  double encoder_ticks_per_rev = 360;  // ticks
  double pwm_full_scale = 100.0;       // PWM units (duty percent)

  void validate() const;
};

enum class Wheel { kRight, kLeft };

struct PlantState {
  Pose2D pose;
  double omega_right = 0;  // rad/s
  double omega_left = 0;
  // Signed quadrature tick counts, truncated from the continuous wheel angle.
  std::int64_t encoder_right = 0;
  std::int64_t encoder_left = 0;
  double wheel_angle_right = 0;  // rad, accumulated
  double wheel_angle_left = 0;
  bool stalled_right = false;
  bool stalled_left = false;

  bool operator==(const PlantState&) const = default;
};

struct WheelSpeeds {
  double right = 0;
  double left = 0;

  bool operator==(const WheelSpeeds&) const = default;
};

/// One explicit-Euler step. Each free wheel relaxes first-order toward
/// (pwm / pwm_full_scale) * max_wheel_speed; the body integrates
///   v = r (w_r + w_l) / 2,  dtheta/dt = r (w_r - w_l) / track_width.
PlantState step_plant(const PlantState& state, const RobotParams& params,
                      double pwm_right, double pwm_left, double dt);

/// Wheel speeds recovered from the tick difference over `dt`.
WheelSpeeds read_encoders(const PlantState& state, const PlantState& prev,
                          const RobotParams& params, double dt);

PlantState set_stall(const PlantState& state, Wheel wheel, bool stalled);

}  // namespace camnav
