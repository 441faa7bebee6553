#include "camnav/controller.hpp"

#include <algorithm>
#include <cmath>

namespace camnav {

void PidConfig::validate() const {
  if (kp < 0 || kd < 0 || ki < 0) {
    throw Error(ErrorCode::kInvalidArgument, "pid: gains must be non-negative");
  }
  if (!(alpha_decay > 0 && alpha_decay < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "pid: alpha_decay must be in (0, 1)");
  }
  if (!(beta_anti > 0) || !(period > 0) || !(output_limit > 0) || !(l_anti > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "pid: limits and period must be positive");
  }
}

PidOutput pid_step(const PidConfig& config, const PidState& state, double setpoint,
                   double measured) {
  const double e = setpoint - measured;
  double integral = state.integral + e * config.period;
  if (std::abs(e) > config.l_anti) integral *= config.alpha_decay;
  integral = std::clamp(integral, -config.beta_anti, config.beta_anti);

  const double derivative = (e - state.prev_error) / config.period;
  const double u = config.kp * e + config.ki * integral + config.kd * derivative;
  return {std::clamp(u, -config.output_limit, config.output_limit), {integral, e}};
}

WheelSpeeds command_to_setpoints(const MotorCommand& cmd, double max_wheel_speed) {
  WheelSpeeds out;
  switch (cmd.kind) {
    case CommandKind::kStop:
      return {0.0, 0.0};
    case CommandKind::kForward:
      out = cmd.speeds.value_or(WheelSpeeds{kDefaultCommandSpeed, kDefaultCommandSpeed});
      break;
    case CommandKind::kTurn:
      out = cmd.speeds.value_or(WheelSpeeds{kDefaultCommandSpeed, -kDefaultCommandSpeed});
      break;
    case CommandKind::kSpeed:
      if (!cmd.speeds) {
        throw Error(ErrorCode::kInvalidArgument, "speed command without wheel speeds");
      }
      out = *cmd.speeds;
      break;
  }
  if (!std::isfinite(out.right) || !std::isfinite(out.left)) {
    throw Error(ErrorCode::kNonFinite, "command speeds must be finite");
  }
  if (std::abs(out.right) > max_wheel_speed || std::abs(out.left) > max_wheel_speed) {
    throw Error(ErrorCode::kOutOfRange, "command speed exceeds plant limit");
  }
  return out;
}

TickOutput controller_tick(const PidConfig& config, const WheelPids& states,
                           const MotorCommand& cmd, double measured_right,
                           double measured_left, double max_wheel_speed) {
  const WheelSpeeds sp = command_to_setpoints(cmd, max_wheel_speed);
  const PidOutput r = pid_step(config, states.right, sp.right, measured_right);
  const PidOutput l = pid_step(config, states.left, sp.left, measured_left);
  return {r.pwm, l.pwm, {r.state, l.state}};
}

MotorController::MotorController(PidConfig config, double max_wheel_speed)
    : config_(config), max_wheel_speed_(max_wheel_speed) {
  config_.validate();
}

void MotorController::on_command(const MotorCommand& cmd, double now) {
  command_to_setpoints(cmd, max_wheel_speed_);  // validates
  command_ = cmd;
  last_command_time_ = now;
}

bool MotorController::deadman_tripped(double now) const {
  return !last_command_time_ || now - *last_command_time_ > kDeadmanTimeout;
}

WheelSpeeds MotorController::setpoints(double now) const {
  if (deadman_tripped(now)) return {0.0, 0.0};
  return command_to_setpoints(command_, max_wheel_speed_);
}

std::pair<double, double> MotorController::tick(double now, const WheelSpeeds& measured) {
  const MotorCommand effective = deadman_tripped(now) ? MotorCommand::stop() : command_;
  const TickOutput out = controller_tick(config_, states_, effective, measured.right,
                                         measured.left, max_wheel_speed_);
  states_ = out.states;
  return {out.pwm_right, out.pwm_left};
}

}  // namespace camnav
