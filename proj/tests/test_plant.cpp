#include <doctest.h>

#include <cmath>
#include <numbers>

#include "camnav/plant.hpp"
#include "camnav/rng.hpp"

using namespace camnav;

namespace {

// Duty that holds a wheel at `omega` in steady state.
double duty_for(const RobotParams& p, double omega) {
  return omega / p.max_wheel_speed * p.pwm_full_scale;
}

}  // namespace

TEST_CASE("steady equal wheel speeds advance along the heading") {
  const RobotParams p;
  for (double theta : {0.0, 0.7, -2.0}) {
    PlantState s;
    s.pose = Pose2D(1.0, 1.0, theta);
    s.omega_right = s.omega_left = 10;
    const double u = duty_for(p, 10);
    const PlantState n = step_plant(s, p, u, u, 0.1);
    CHECK(n.omega_right == doctest::Approx(10));
    CHECK((n.pose.position() - s.pose.position()).norm() == doctest::Approx(0.03));
    const Vec2<double> moved = n.pose.position() - s.pose.position();
    CHECK((moved.normalized() - s.pose.forward()).norm() < 1e-12);
    CHECK(n.pose.theta() == doctest::Approx(theta));
  }
}

TEST_CASE("opposite wheel speeds rotate in place") {
  const RobotParams p;
  PlantState s;
  s.pose = Pose2D(2.0, 1.0, 0.0);
  s.omega_right = 10;
  s.omega_left = -10;
  const PlantState n = step_plant(s, p, duty_for(p, 10), duty_for(p, -10), 0.1);
  CHECK(n.pose.x() == doctest::Approx(2.0));
  CHECK(n.pose.y() == doctest::Approx(1.0));
  CHECK(n.pose.theta() == doctest::Approx(0.3));
}

TEST_CASE("zero input from rest changes nothing") {
  const RobotParams p;
  PlantState s;
  s.pose = Pose2D(0.5, 0.5, 1.0);
  CHECK(step_plant(s, p, 0, 0, 0.01) == s);
  CHECK_THROWS_AS(step_plant(s, p, 0, 0, 0.0), Error);
}

TEST_CASE("wheel lag is first order with the configured time constant") {
  const RobotParams p;
  PlantState s;
  const double dt = 1.0 / 300.0;
  const int n = static_cast<int>(std::lround(p.motor_time_constant / dt));
  for (int i = 0; i < n; ++i) s = step_plant(s, p, p.pwm_full_scale, p.pwm_full_scale, dt);
  CHECK(s.omega_right / p.max_wheel_speed == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-9));
  // Duty beyond full scale saturates.
  const PlantState big = step_plant(PlantState{}, p, 1e6, -1e6, 10.0);
  CHECK(big.omega_right == doctest::Approx(p.max_wheel_speed));
  CHECK(big.omega_left == doctest::Approx(-p.max_wheel_speed));
}

TEST_CASE("encoder readings") {
  const RobotParams p;
  PlantState prev, now;
  CHECK(read_encoders(now, prev, p, 0.1).right == 0.0);
  now.encoder_right = 57;
  now.encoder_left = -57;
  const WheelSpeeds w = read_encoders(now, prev, p, 0.1);
  CHECK(w.right == doctest::Approx(57 * 2 * std::numbers::pi / 36));
  CHECK(w.right == doctest::Approx(9.948).epsilon(1e-4));
  CHECK(w.left == doctest::Approx(-w.right));
}

TEST_CASE("measured speed is within one tick per period of the truth") {
  const RobotParams p;
  const double dt = 1.0 / 300.0;
  const double bound = 2 * std::numbers::pi / (p.encoder_ticks_per_rev * 0.1);
  for (double omega : {10.0, -10.0, 3.3, 47.0}) {
    PlantState s;
    s.omega_right = s.omega_left = omega;
    const double u = duty_for(p, omega);
    PlantState prev = s;
    for (int tick = 0; tick < 50; ++tick) {
      for (int k = 0; k < 30; ++k) s = step_plant(s, p, u, u, dt);
      const WheelSpeeds m = read_encoders(s, prev, p, 0.1);
      CHECK(std::abs(m.right - omega) <= bound + 1e-9);
      CHECK(std::abs(m.left - omega) <= bound + 1e-9);
      prev = s;
    }
  }
}

TEST_CASE("stalled wheel holds zero speed and resumes a first-order rise") {
  const RobotParams p;
  const double dt = 1.0 / 300.0;
  PlantState stalled = set_stall(PlantState{}, Wheel::kRight, true);
  for (int k = 0; k < 3000; ++k) {
    stalled = step_plant(stalled, p, p.pwm_full_scale, 0, dt);
    CHECK(stalled.omega_right == 0.0);
  }
  stalled = set_stall(stalled, Wheel::kRight, false);
  PlantState fresh;
  for (int k = 0; k < 300; ++k) {
    stalled = step_plant(stalled, p, p.pwm_full_scale, 0, dt);
    fresh = step_plant(fresh, p, p.pwm_full_scale, 0, dt);
    CHECK(stalled.omega_right == fresh.omega_right);
  }
}

TEST_CASE("both wheels stalled freeze the pose") {
  const RobotParams p;
  PlantState s;
  s.pose = Pose2D(1, 2, 0.5);
  s = set_stall(set_stall(s, Wheel::kRight, true), Wheel::kLeft, true);
  for (int k = 0; k < 100; ++k) s = step_plant(s, p, 100, -100, 0.01);
  CHECK(s.pose == Pose2D(1, 2, 0.5));
}

TEST_CASE("robot parameters are validated") {
  RobotParams p;
  p.track_width = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = RobotParams{};
  p.motor_time_constant = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK_NOTHROW(RobotParams{}.validate());
}
