#include <doctest.h>

#include <cmath>

#include "camnav/controller.hpp"
#include "camnav/rng.hpp"
#include "support.hpp"

using namespace camnav;

TEST_CASE("zero error from a zero state gives zero output") {
  const PidOutput out = pid_step(PidConfig{}, PidState{}, 5.0, 5.0);
  CHECK(out.pwm == 0.0);
  CHECK(out.state == PidState{});
}

TEST_CASE("pid hand-worked values") {
  const PidConfig cfg;
  const PidOutput small = pid_step(cfg, PidState{}, 1.0, 0.0);
  CHECK(small.state.integral == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(small.pwm == doctest::Approx(2.0).epsilon(1e-14));
  const PidOutput large = pid_step(cfg, PidState{}, 20.0, 0.0);
  CHECK(large.state.integral == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(large.pwm == doctest::Approx(36.4).epsilon(1e-14));
}

TEST_CASE("integrator never leaves the clamp") {
  const PidConfig cfg;
  Rng rng(9);
  PidState s;
  for (int i = 0; i < 10000; ++i) {
    const PidOutput out = pid_step(cfg, s, rng.uniform(-80, 80), rng.uniform(-80, 80));
    CHECK(std::abs(out.state.integral) <= cfg.beta_anti);
    CHECK(std::abs(out.pwm) <= cfg.output_limit);
    s = out.state;
  }
}

TEST_CASE("command setpoints") {
  CHECK(command_to_setpoints(MotorCommand::stop()) == WheelSpeeds{0, 0});
  CHECK(command_to_setpoints(MotorCommand::forward()) == WheelSpeeds{10, 10});
  CHECK(command_to_setpoints(MotorCommand::turn(1)) == WheelSpeeds{10, -10});
  CHECK(command_to_setpoints(MotorCommand::turn(-1)) == WheelSpeeds{-10, 10});
  CHECK(command_to_setpoints(MotorCommand{CommandKind::kTurn, std::nullopt}) == WheelSpeeds{10, -10});
  CHECK(command_to_setpoints(MotorCommand::speed(0.43, 0.57)) == WheelSpeeds{0.43, 0.57});
  try {
    command_to_setpoints(MotorCommand::speed(81, 0));
    FAIL("expected out-of-range");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfRange);
  }
  CHECK_THROWS_AS(command_to_setpoints(MotorCommand::speed(NAN, 0)), Error);
  CHECK_THROWS_AS(command_to_setpoints(MotorCommand{CommandKind::kSpeed, std::nullopt}), Error);
}

TEST_CASE("controller_tick symmetry") {
  const PidConfig cfg;
  const TickOutput stop = controller_tick(cfg, {}, MotorCommand::stop(), 0, 0);
  CHECK(stop.pwm_right == 0.0);
  CHECK(stop.pwm_left == 0.0);
  const TickOutput fwd = controller_tick(cfg, {}, MotorCommand::forward(), 0, 0);
  CHECK(fwd.pwm_right > 0);
  CHECK(fwd.pwm_right == fwd.pwm_left);
  const TickOutput turn = controller_tick(cfg, {}, MotorCommand::turn(1), 0, 0);
  CHECK(turn.pwm_right > 0);
  CHECK(turn.pwm_left == -turn.pwm_right);
}

TEST_CASE("dead-man timer zeroes setpoints") {
  MotorController fw;
  CHECK(fw.setpoints(0.0) == WheelSpeeds{0, 0});
  fw.on_command(MotorCommand::forward(), 1.0);
  CHECK(fw.setpoints(1.2) == WheelSpeeds{10, 10});
  CHECK(fw.setpoints(1.5) == WheelSpeeds{10, 10});
  CHECK(fw.deadman_tripped(1.5001));
  CHECK(fw.setpoints(1.5001) == WheelSpeeds{0, 0});
  fw.on_command(MotorCommand::turn(-1), 2.0);
  CHECK(fw.setpoints(2.1) == WheelSpeeds{-10, 10});
}

TEST_CASE("rejected commands keep the previous one") {
  MotorController fw;
  fw.on_command(MotorCommand::forward(), 0.0);
  CHECK_THROWS_AS(fw.on_command(MotorCommand::speed(100, 0), 0.1), Error);
  CHECK(fw.setpoints(0.2) == WheelSpeeds{10, 10});
}

TEST_CASE("closed loop settles within 5 percent in under 3 s") {
  for (double sp : {10.0, -10.0, 5.0}) {
    const testing::WheelTrace tr = testing::run_wheel(PidConfig{}, RobotParams{}, sp, 8.0);
    CHECK(testing::settle_time(tr, sp) < 3.0);
  }
}

TEST_CASE("steps far beyond l_anti stall short of the setpoint") {
  // Past l_anti the decayed integrator plus kp*e balances the plant at an
  // error that itself stays above l_anti.
  const testing::WheelTrace tr = testing::run_wheel(PidConfig{}, RobotParams{}, 30.0, 8.0);
  CHECK(30.0 - tr.omega.back() > PidConfig{}.l_anti);
}

TEST_CASE("anti-windup lowers integrator peak and overshoot after a stall") {
  const testing::StallRelease with = testing::stall_release(PidConfig{});
  const testing::StallRelease without = testing::stall_release(testing::without_anti_windup(PidConfig{}));
  CHECK(with.integrator_peak <= PidConfig{}.beta_anti);
  CHECK(with.integrator_peak < without.integrator_peak);
  CHECK(with.overshoot < without.overshoot);
}

TEST_CASE("pid config validation") {
  PidConfig c;
  c.alpha_decay = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PidConfig{};
  c.period = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(PidConfig{}.validate());
}
