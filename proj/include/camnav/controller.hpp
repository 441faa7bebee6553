#pragma once

#include <optional>
#include <utility>

#include "camnav/plant.hpp"

namespace camnav {

/// Anti-windup PID gains. Defaults are the empirically tuned firmware values.
struct PidConfig {
  double kp = 1.2;
  double kd = 0.05;
  double ki = 3.0;
  double l_anti = 10.0;       // |error| above which the integrator decays
  double alpha_decay = 0.4;   // decay factor applied past l_anti
  double beta_anti = 100.0;   // integrator clamp
  double output_limit = 100.0;
  double period = 0.1;        // s (10 Hz)

  void validate() const;
};

struct PidState {
  double integral = 0;
  double prev_error = 0;

  bool operator==(const PidState&) const = default;
};

struct PidOutput {
  double pwm = 0;
  PidState state;
};

/// One controller period. Order: integrate, decay if |e| > l_anti, clamp,
/// then output = kp*e + ki*I + kd*(e - e_prev)/period, saturated.
PidOutput pid_step(const PidConfig& config, const PidState& state,
                   double setpoint, double measured);

/// Firmware wheel speed for `turn` and `forward` when the command carries none.
inline constexpr double kDefaultCommandSpeed = 10.0;  // rad/s

enum class CommandKind { kTurn, kForward, kStop, kSpeed };

/// A motor command as carried on the wire. `turn` and `forward` may carry
/// explicit wheel speeds (a turn's sign is the rotation direction: positive
/// increases heading, i.e. right wheel forward).
struct MotorCommand {
  CommandKind kind = CommandKind::kStop;
  std::optional<WheelSpeeds> speeds;

  static MotorCommand stop() { return {CommandKind::kStop, std::nullopt}; }
  static MotorCommand forward() { return {CommandKind::kForward, std::nullopt}; }
  static MotorCommand forward(double speed) {
    return {CommandKind::kForward, WheelSpeeds{speed, speed}};
  }
  static MotorCommand turn(int direction, double speed = kDefaultCommandSpeed) {
    const double s = direction >= 0 ? speed : -speed;
    return {CommandKind::kTurn, WheelSpeeds{s, -s}};
  }
  static MotorCommand speed(double right, double left) {
    return {CommandKind::kSpeed, WheelSpeeds{right, left}};
  }

  bool operator==(const MotorCommand&) const = default;
};

/// Wheel setpoints for a command; rejects speeds beyond `max_wheel_speed`.
WheelSpeeds command_to_setpoints(const MotorCommand& cmd,
                                 double max_wheel_speed = RobotParams{}.max_wheel_speed);

struct WheelPids {
  PidState right;
  PidState left;

  bool operator==(const WheelPids&) const = default;
};

struct TickOutput {
  double pwm_right = 0;
  double pwm_left = 0;
  WheelPids states;
};

/// command_to_setpoints followed by one pid_step per wheel.
TickOutput controller_tick(const PidConfig& config, const WheelPids& states,
                           const MotorCommand& cmd, double measured_right,
                           double measured_left,
                           double max_wheel_speed = RobotParams{}.max_wheel_speed);

/// Setpoints fall back to zero when no command arrived for this long.
inline constexpr double kDeadmanTimeout = 0.5;  // s

/// Controller-board firmware: latest command, dead-man timer, two PIDs.
/// Time is supplied by the caller (simulated or wall clock, in seconds).
class MotorController {
 public:
  explicit MotorController(PidConfig config = {},
                           double max_wheel_speed = RobotParams{}.max_wheel_speed);

  /// Accepts a command; throws Error(kOutOfRange) and keeps the previous
  /// command if its speeds exceed the plant limit.
  void on_command(const MotorCommand& cmd, double now);

  /// Runs one PID period and returns (pwm_right, pwm_left).
  std::pair<double, double> tick(double now, const WheelSpeeds& measured);

  /// Setpoints the next tick would use at time `now`.
  WheelSpeeds setpoints(double now) const;
  bool deadman_tripped(double now) const;

  const WheelPids& pid_states() const { return states_; }
  const PidConfig& config() const { return config_; }

 private:
  PidConfig config_;
  double max_wheel_speed_;
  MotorCommand command_ = MotorCommand::stop();
  std::optional<double> last_command_time_;
  WheelPids states_;
};

}  // namespace camnav
