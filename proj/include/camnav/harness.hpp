#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "camnav/camera.hpp"
#include "camnav/controller.hpp"
#include "camnav/navigation.hpp"
#include "camnav/plant.hpp"
#include "camnav/vision.hpp"

namespace camnav {

struct SimConfig {
  double physics_dt = 1.0 / 300.0;  // s
  double pid_period = 0.1;          // s
  double camera_period = 1.0 / 30.0;
  double pixel_noise_std = 1.0;     // px, per marker center and axis
  double command_latency = 0.05;    // s, one way
  std::uint64_t rng_seed = 1;
  double arena_width = 4.0;         // m
  double arena_height = 3.0;
  double goal_margin = 0.3;         // m kept free along arena edges
  double settle_time = 3.0;         // s allowed for coasting after stop
  double settle_speed = 0.05;       // rad/s wheel speed that counts as at rest
  // Experiment 2 track geometry.
  double track_amplitude = 0.5;
  double track_span = 2.0;
  std::size_t track_samples = 401;

  RobotParams robot;
  PidConfig pid;
  GoalSteerConfig steer;
  TrackerConfig tracker;
  CameraModel camera;
  MarkerLayout markers;

  /// Centers the camera on the arena and picks the largest scale that keeps
  /// the whole arena inside the frame.
  void fit_camera_to_arena();
  /// Checks field ranges and that both periods are whole multiples of
  /// physics_dt. Throws Error(kInvalidArgument).
  void validate() const;

  int pid_steps() const;
  int camera_steps() const;
  int latency_steps() const;
};

/// Everything a `sim` run needs besides SimConfig.
struct GoalScenario {
  Pose2D start;
  WorldPoint goal;
};
struct TrackScenario {
  Track track;
  /// Defaults to the first track point, heading along the initial tangent.
  std::optional<Pose2D> start;
};
using Scenario = std::variant<GoalScenario, TrackScenario>;

struct LogRow {
  double t = 0;
  Pose2D pose;  // plant ground truth
  WorldPoint target;
  double delta_d = 0;

  bool operator==(const LogRow&) const = default;
};

struct TrialResult {
  bool converged = false;
  double final_error = 0;     // goal scenario: |true position - goal| at rest
  double mean_deviation = 0;  // track scenario: time-average of true delta_d
  double deviation_std = 0;
  double elapsed = 0;         // simulated seconds
  std::vector<LogRow> log;
  std::uint64_t vision_dropouts = 0;
  std::uint64_t commands_sent = 0;
  std::uint64_t acks_received = 0;
  std::uint64_t pid_ticks = 0;
  std::uint64_t physics_steps = 0;

  bool operator==(const TrialResult&) const = default;
};

/// Deterministic closed loop: physics every step, camera + navigation every
/// camera period (commands cross an in-process netlink loopback with the
/// configured latency), firmware PID every pid period. Metrics use the plant
/// ground truth.
TrialResult run_sim(const SimConfig& config, const Scenario& scenario, double max_time);

struct TrialRow {
  int trial = 0;
  bool converged = false;
  double final_error = 0;
  double elapsed = 0;
};

struct Exp1Summary {
  double mean = 0;
  double std = 0;
  int converged = 0;
  int failed = 0;
  std::vector<TrialRow> trials;
};

/// Random start poses and goals (uniform, margin from the arena edges); mean
/// and population std of the final error over converged trials.
Exp1Summary experiment1(const SimConfig& config, int n_trials, std::uint64_t seed,
                        double max_time = 60.0);

enum class TrackKind { kHalf, kThreeQuarter, kFull, kStraight };

std::optional<TrackKind> parse_track_kind(const std::string& name);
std::string to_string(TrackKind kind);

/// The experiment track for `kind`, placed in the middle of the arena.
Track experiment_track(const SimConfig& config, TrackKind kind);

struct Exp2Summary {
  bool converged = false;
  double mean = 0;
  double std = 0;
  TrialResult result;
};

Exp2Summary experiment2(const SimConfig& config, TrackKind kind, std::uint64_t seed,
                        double max_time = 600.0);

/// `trial,final_error_m,elapsed_s`; a non-converged trial's error is "nan".
void write_trials_csv(std::ostream& out, const Exp1Summary& summary);
/// `t,x,y,theta,target_x,target_y,delta_d`.
void write_trajectory_csv(std::ostream& out, const TrialResult& result);

/// `key = value` lines; '#' comments. Keys are SimConfig field names, with
/// nested structs as `robot.`, `pid.`, `steer.`, `tracker.`, `camera.`,
/// `markers.` prefixes. Keys listed in `extra_keys` are returned instead of
/// applied.
struct ConfigFile {
  SimConfig config;
  std::vector<std::pair<std::string, std::string>> extra;

  std::optional<std::string> get(const std::string& key) const;
};
ConfigFile load_config(std::istream& in, const std::vector<std::string>& extra_keys = {});

/// Builds the scenario described by a `sim` config file (`scenario = goal|track`
/// plus start/goal/track keys).
Scenario scenario_from_config(const ConfigFile& file);
std::vector<std::string> scenario_config_keys();

}  // namespace camnav
