#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "camnav/controller.hpp"
#include "camnav/plant.hpp"

namespace camnav::testing {

inline constexpr double kPhysicsDt = 1.0 / 300.0;

struct WheelTrace {
  std::vector<double> t;
  std::vector<double> omega;     // true right-wheel speed, every physics step
  std::vector<double> integral;  // right-wheel integrator, every PID tick
};

// Right wheel under its PID (encoder feedback), constant setpoint. The wheel
// is held stalled on [stall_from, stall_to).
inline WheelTrace run_wheel(const PidConfig& pid, const RobotParams& robot, double setpoint,
                            double duration, double stall_from = -1, double stall_to = -1) {
  const int pid_steps = static_cast<int>(std::lround(pid.period / kPhysicsDt));
  const auto steps = static_cast<std::int64_t>(std::lround(duration / kPhysicsDt));
  WheelTrace trace;
  PlantState plant;
  PlantState at_tick = plant;
  PidState state;
  double pwm = 0;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * kPhysicsDt;
    const bool stalled = t >= stall_from && t < stall_to;
    if (plant.stalled_right != stalled) plant = set_stall(plant, Wheel::kRight, stalled);
    if (k % pid_steps == 0) {
      const double measured = k == 0 ? 0.0 : read_encoders(plant, at_tick, robot, pid.period).right;
      at_tick = plant;
      const PidOutput out = pid_step(pid, state, setpoint, measured);
      state = out.state;
      pwm = out.pwm;
      trace.integral.push_back(state.integral);
    }
    plant = step_plant(plant, robot, pwm, 0.0, kPhysicsDt);
    trace.t.push_back(t + kPhysicsDt);
    trace.omega.push_back(plant.omega_right);
  }
  return trace;
}

struct StallRelease {
  double integrator_peak = 0;
  double overshoot = 0;  // rad/s above the setpoint after release
};

// Spin up for 5 s, stall for 10 s, release and watch 10 s.
inline StallRelease stall_release(const PidConfig& pid, const RobotParams& robot = {},
                                  double setpoint = kDefaultCommandSpeed) {
  const WheelTrace tr = run_wheel(pid, robot, setpoint, 25.0, 5.0, 15.0);
  StallRelease out;
  for (double i : tr.integral) out.integrator_peak = std::max(out.integrator_peak, std::abs(i));
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    if (tr.t[k] >= 15.0) out.overshoot = std::max(out.overshoot, tr.omega[k] - setpoint);
  }
  return out;
}

inline PidConfig without_anti_windup(PidConfig pid) {
  pid.l_anti = std::numeric_limits<double>::infinity();
  pid.beta_anti = std::numeric_limits<double>::infinity();
  return pid;
}

// Time after which the wheel stays within `band` (relative) of the setpoint.
inline double settle_time(const WheelTrace& tr, double setpoint, double band = 0.05) {
  double last_outside = 0;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    if (std::abs(tr.omega[k] - setpoint) > band * std::abs(setpoint)) last_outside = tr.t[k];
  }
  return last_outside;
}

}  // namespace camnav::testing
