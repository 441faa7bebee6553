#include <doctest.h>

#include <cmath>
#include <sstream>

#include "camnav/calibration.hpp"
#include "camnav/rng.hpp"

using namespace camnav;

namespace {

struct Fit {
  double s, cx, cy;
};

// Closed form from centred moments: for fixed s the offsets are means, so
// s = sum(dX du + dY dv) / sum(dX^2 + dY^2).
Fit centred_moment_fit(const CalibrationSet& pairs) {
  const double n = static_cast<double>(pairs.size());
  double mx = 0, my = 0, mu = 0, mv = 0;
  for (const auto& p : pairs) {
    mx += p.world.x() / n;
    my += p.world.y() / n;
    mu += p.pixel.u() / n;
    mv += p.pixel.v() / n;
  }
  double num = 0, den = 0;
  for (const auto& p : pairs) {
    const double dx = p.world.x() - mx, dy = p.world.y() - my;
    num += dx * (p.pixel.u() - mu) + dy * (p.pixel.v() - mv);
    den += dx * dx + dy * dy;
  }
  const double s = num / den;
  return {s, mx - mu / s, my - mv / s};
}

CalibrationSet grid_pairs(const CameraModel& truth, double noise, Rng* rng) {
  CalibrationSet pairs;
  for (const auto& w : {WorldPoint(1, 2), WorldPoint(2, 2), WorldPoint(1, 3), WorldPoint(2, 3)}) {
    PixelPoint px = project(truth, w);
    if (rng) px += Vec2<double>(rng->gaussian(0, noise), rng->gaussian(0, noise));
    pairs.push_back({w, px});
  }
  return pairs;
}

}  // namespace

TEST_CASE("noiseless grid recovers the generating camera") {
  CameraModel truth;
  truth.scale = 200;
  truth.origin_x = 1;
  truth.origin_y = 2;
  const CalibrationResult r = calibrate(grid_pairs(truth, 0, nullptr));
  CHECK(std::abs(r.camera.scale / 200 - 1) < 1e-9);
  CHECK(std::abs(r.camera.origin_x - 1) < 1e-9);
  CHECK(std::abs(r.camera.origin_y - 2) < 1e-9);
  CHECK(r.residual_rms < 1e-9);
}

TEST_CASE("1 px noise stays within 2 percent") {
  CameraModel truth;
  truth.scale = 200;
  truth.origin_x = 1;
  truth.origin_y = 2;
  Rng rng(2024);
  double rms_sum = 0;
  const int draws = 200;
  for (int i = 0; i < draws; ++i) {
    const CalibrationResult r = calibrate(grid_pairs(truth, 1.0, &rng));
    CHECK(std::abs(r.camera.scale / 200 - 1) < 0.02);
    CHECK(std::abs(r.camera.origin_x / 1 - 1) < 0.02);
    CHECK(std::abs(r.camera.origin_y / 2 - 1) < 0.02);
    rms_sum += r.residual_rms;
  }
  // 8 residual coordinates, 3 fitted parameters: E[sum of squares] = 5 sigma^2,
  // so the per-point RMS sits near sqrt(5/4) px.
  CHECK(rms_sum / draws <= 2.0);
  CHECK(rms_sum / draws == doctest::Approx(std::sqrt(5.0 / 4.0)).epsilon(0.15));
}

TEST_CASE("LDLT solve agrees with the centred-moment closed form") {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    CalibrationSet pairs;
    const int n = 2 + static_cast<int>(rng.uniform() * 10);
    for (int k = 0; k < n; ++k) {
      pairs.push_back({WorldPoint(rng.uniform(-3, 3), rng.uniform(-3, 3)),
                       PixelPoint(rng.uniform(-300, 300), rng.uniform(-300, 300))});
    }
    const Fit oracle = centred_moment_fit(pairs);
    if (!(oracle.s > 0)) {
      CHECK_THROWS_AS(calibrate(pairs), Error);
      continue;
    }
    const CalibrationResult r = calibrate(pairs);
    CHECK(r.camera.scale == doctest::Approx(oracle.s).epsilon(1e-9));
    CHECK(r.camera.origin_x == doctest::Approx(oracle.cx).epsilon(1e-8));
    CHECK(r.camera.origin_y == doctest::Approx(oracle.cy).epsilon(1e-8));
  }
}

TEST_CASE("calibration errors") {
  CalibrationSet one{{WorldPoint(1, 2), PixelPoint(0, 0)}};
  try {
    calibrate(one);
    FAIL("expected too-few-points");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooFewPoints);
  }
  CalibrationSet same{{WorldPoint(1, 2), PixelPoint(0, 0)}, {WorldPoint(1, 2), PixelPoint(3, 3)}};
  try {
    calibrate(same);
    FAIL("expected degenerate-geometry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateGeometry);
  }
  // Mirrored pixels fit a negative scale.
  CalibrationSet flipped{{WorldPoint(0, 0), PixelPoint(0, 0)}, {WorldPoint(1, 1), PixelPoint(-100, -100)}};
  try {
    calibrate(flipped);
    FAIL("expected non-positive-scale");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonPositiveScale);
  }
}

TEST_CASE("pairs file parsing") {
  std::istringstream in("# X Y u v\n1 2 0 0\n2 2 200 0  # east\n\n1 3 0 200\n");
  const CalibrationSet pairs = read_calibration_pairs(in);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[1].pixel.u() == 200);
  const CalibrationResult r = calibrate(pairs);
  CHECK(r.camera.scale == doctest::Approx(200));
  std::istringstream bad("1 2 3\n");
  CHECK_THROWS_AS(read_calibration_pairs(bad), Error);
}

TEST_CASE("calibration in single precision") {
  CameraModelT<float> truth;
  truth.scale = 150;
  truth.origin_x = 0.5f;
  truth.origin_y = 0.25f;
  CalibrationSetT<float> pairs;
  for (const auto& w : {WorldPointT<float>(0, 0), WorldPointT<float>(1, 0), WorldPointT<float>(0, 1)}) {
    pairs.push_back({w, project(truth, w)});
  }
  const CalibrationResultT<float> r = calibrate(pairs);
  CHECK(r.camera.scale == doctest::Approx(150.0f).epsilon(1e-4));
}
