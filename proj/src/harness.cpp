#include "camnav/harness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "camnav/format.hpp"
#include "camnav/netlink.hpp"
#include "camnav/rng.hpp"

namespace camnav {

namespace {

int whole_steps(double period, double dt, const char* name) {
  const double ratio = period / dt;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1) || std::abs(ratio - rounded) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be a whole multiple of physics_dt");
  }
  return static_cast<int>(rounded);
}

bool inside_arena(const SimConfig& c, const WorldPoint& p) {
  return p.x() >= 0 && p.y() >= 0 && p.x() <= c.arena_width && p.y() <= c.arena_height;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

void SimConfig::fit_camera_to_arena() {
  camera.origin_x = arena_width / 2;
  camera.origin_y = arena_height / 2;
  camera.scale = std::min(camera.image_width / arena_width, camera.image_height / arena_height);
}

void SimConfig::validate() const {
  if (!(physics_dt > 0) || !(arena_width > 0) || !(arena_height > 0) ||
      pixel_noise_std < 0 || command_latency < 0 || goal_margin < 0 || settle_time < 0 ||
      track_samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "sim config out of range");
  }
  whole_steps(pid_period, physics_dt, "pid_period");
  whole_steps(camera_period, physics_dt, "camera_period");
  if (std::abs(pid.period - pid_period) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "pid.period must equal pid_period");
  }
  robot.validate();
  pid.validate();
  steer.validate();
  tracker.validate();
  camera.validate();
  markers.validate();
}

int SimConfig::pid_steps() const { return whole_steps(pid_period, physics_dt, "pid_period"); }
int SimConfig::camera_steps() const {
  return whole_steps(camera_period, physics_dt, "camera_period");
}
int SimConfig::latency_steps() const {
  return static_cast<int>(std::lround(command_latency / physics_dt));
}

TrialResult run_sim(const SimConfig& config, const Scenario& scenario, double max_time) {
  config.validate();
  const auto* goal_sc = std::get_if<GoalScenario>(&scenario);
  const auto* track_sc = std::get_if<TrackScenario>(&scenario);

  PlantState plant;
  if (goal_sc) {
    if (!inside_arena(config, goal_sc->goal)) {
      throw Error(ErrorCode::kInvalidArgument, "goal lies outside the arena");
    }
    plant.pose = goal_sc->start;
  } else {
    const Track& track = track_sc->track;
    for (const auto& p : track.points()) {
      if (!inside_arena(config, p)) {
        throw Error(ErrorCode::kInvalidArgument, "track leaves the arena");
      }
    }
    const Vec2<double> t0 = track.tangent(0);
    plant.pose = track_sc->start.value_or(Pose2D(track[0], std::atan2(t0.x(), t0.y())));
  }

  const int pid_steps = config.pid_steps();
  const int cam_steps = config.camera_steps();
  const int latency = config.latency_steps();
  const double dt = config.physics_dt;
  const auto max_steps = static_cast<std::int64_t>(std::ceil(max_time / dt));
  const auto settle_steps = static_cast<std::int64_t>(std::ceil(config.settle_time / dt));

  MotorController firmware(config.pid, config.robot.max_wheel_speed);
  PlantState at_last_pid = plant;
  double pwm_right = 0;
  double pwm_left = 0;

  // Loopback link: frames in flight, in send order.
  struct InFlight {
    std::int64_t deliver_at;
    std::string frame;
  };
  std::deque<InFlight> to_robot;
  std::deque<InFlight> to_server;
  net::SeqCounter server_seq;
  net::SeqCounter robot_seq;
  net::SeqGuard robot_guard;
  net::SeqGuard server_guard;

  NavPhase phase = NavPhase::kAligning;
  std::optional<std::int64_t> done_step;
  std::vector<double> deviations;

  TrialResult result;
  std::int64_t k = 0;
  std::uint64_t frame_index = 0;
  for (;; ++k) {
    const double t = static_cast<double>(k) * dt;

    if (k % cam_steps == 0) {
      // Ground-truth log / metrics.
      LogRow row{t, plant.pose, WorldPoint(), 0.0};
      if (goal_sc) {
        row.target = goal_sc->goal;
        row.delta_d = (goal_sc->goal - plant.pose.position()).norm();
      } else {
        const TrackProjection proj = nearest_track_point(plant.pose.position(), track_sc->track);
        row.target = track_sc->track[proj.index];
        row.delta_d = proj.delta_d;
        if (!done_step) deviations.push_back(proj.delta_d);
      }
      result.log.push_back(row);

      MotorCommand cmd = MotorCommand::stop();
      if (!done_step) {
        const SyntheticFrame frame =
            render_markers(config.camera, plant.pose, config.markers, config.pixel_noise_std,
                           derive_seed(config.rng_seed, frame_index));
        std::optional<Pose2D> seen;
        try {
          seen = locate_robot(config.camera, frame);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kMarkerNotDetected &&
              e.code() != ErrorCode::kDegenerateOrientation) {
            throw;
          }
          ++result.vision_dropouts;
        }
        if (seen) {
          if (goal_sc) {
            const SteerOutput out = steer_step(*seen, goal_sc->goal, phase, config.steer);
            phase = out.phase;
            cmd = out.command;
            if (phase == NavPhase::kDone) done_step = k;
          } else {
            cmd = tracker_step(*seen, track_sc->track, config.tracker);
            if (cmd.kind == CommandKind::kStop) done_step = k;
          }
        }
      }
      to_robot.push_back({k + latency, net::encode({server_seq.next(), net::Cmd{cmd}})});
      ++result.commands_sent;
      ++frame_index;
    }

    // Robot side of the link.
    while (!to_robot.empty() && to_robot.front().deliver_at <= k) {
      const net::WireMessage msg = net::decode(to_robot.front().frame);
      to_robot.pop_front();
      robot_guard.accept(msg.seq);
      if (const auto* c = std::get_if<net::Cmd>(&msg.payload)) {
        firmware.on_command(c->command, t);
        to_server.push_back(
            {k + latency, net::encode({robot_seq.next(), net::Ack{msg.seq, std::nullopt}})});
      }
    }
    while (!to_server.empty() && to_server.front().deliver_at <= k) {
      const net::WireMessage msg = net::decode(to_server.front().frame);
      to_server.pop_front();
      server_guard.accept(msg.seq);
      if (std::holds_alternative<net::Ack>(msg.payload)) ++result.acks_received;
    }

    if (k % pid_steps == 0) {
      const WheelSpeeds measured =
          k == 0 ? WheelSpeeds{} : read_encoders(plant, at_last_pid, config.robot, config.pid_period);
      at_last_pid = plant;
      std::tie(pwm_right, pwm_left) = firmware.tick(t, measured);
      ++result.pid_ticks;
    }

    if (done_step) {
      const bool at_rest = std::abs(plant.omega_right) < config.settle_speed &&
                           std::abs(plant.omega_left) < config.settle_speed;
      const bool stop_delivered = k >= *done_step + latency + pid_steps;
      if ((stop_delivered && at_rest) || k - *done_step >= settle_steps) break;
    }
    if (k >= max_steps) break;

    plant = step_plant(plant, config.robot, pwm_right, pwm_left, dt);
    ++result.physics_steps;
  }

  result.elapsed = static_cast<double>(k) * dt;
  result.converged = done_step.has_value();
  if (goal_sc) {
    result.final_error = (goal_sc->goal - plant.pose.position()).norm();
  } else {
    result.mean_deviation = mean_of(deviations);
    result.deviation_std = population_std(deviations, result.mean_deviation);
  }
  return result;
}

Exp1Summary experiment1(const SimConfig& config, int n_trials, std::uint64_t seed,
                        double max_time) {
  if (n_trials < 1) throw Error(ErrorCode::kInvalidArgument, "experiment1: n_trials must be >= 1");
  const double m = config.goal_margin;
  if (!(config.arena_width > 2 * m) || !(config.arena_height > 2 * m)) {
    throw Error(ErrorCode::kInvalidArgument, "experiment1: arena smaller than margins");
  }
  Exp1Summary summary;
  std::vector<double> errors;
  for (int i = 0; i < n_trials; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double sx = rng.uniform(m, config.arena_width - m);
    const double sy = rng.uniform(m, config.arena_height - m);
    const double st = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double gx = rng.uniform(m, config.arena_width - m);
    const double gy = rng.uniform(m, config.arena_height - m);

    SimConfig trial_cfg = config;
    trial_cfg.rng_seed = rng.next_u64();
    const TrialResult r =
        run_sim(trial_cfg, GoalScenario{Pose2D(sx, sy, st), WorldPoint(gx, gy)}, max_time);
    summary.trials.push_back({i, r.converged, r.final_error, r.elapsed});
    if (r.converged) {
      ++summary.converged;
      errors.push_back(r.final_error);
    } else {
      ++summary.failed;
    }
  }
  summary.mean = mean_of(errors);
  summary.std = population_std(errors, summary.mean);
  return summary;
}

std::optional<TrackKind> parse_track_kind(const std::string& name) {
  if (name == "half") return TrackKind::kHalf;
  if (name == "three-quarter" || name == "three_quarter") return TrackKind::kThreeQuarter;
  if (name == "full") return TrackKind::kFull;
  if (name == "straight" || name == "line") return TrackKind::kStraight;
  return std::nullopt;
}

std::string to_string(TrackKind kind) {
  switch (kind) {
    case TrackKind::kHalf: return "half";
    case TrackKind::kThreeQuarter: return "three-quarter";
    case TrackKind::kFull: return "full";
    case TrackKind::kStraight: return "straight";
  }
  return "half";
}

Track experiment_track(const SimConfig& config, TrackKind kind) {
  const Vec2<double> offset((config.arena_width - config.track_span) / 2,
                            config.arena_height / 2);
  if (kind == TrackKind::kStraight) {
    return gen_line_track(WorldPoint(offset),
                          WorldPoint(offset + Vec2<double>(config.track_span, 0)),
                          config.track_samples);
  }
  const SineKind sine = kind == TrackKind::kHalf           ? SineKind::kHalf
                        : kind == TrackKind::kThreeQuarter ? SineKind::kThreeQuarter
                                                           : SineKind::kFull;
  const Track base =
      gen_sine_track(sine, config.track_amplitude, config.track_span, config.track_samples);
  std::vector<WorldPoint> pts;
  pts.reserve(base.size());
  for (const auto& p : base.points()) pts.emplace_back(WorldPoint(p + offset));
  return Track(std::move(pts));
}

Exp2Summary experiment2(const SimConfig& config, TrackKind kind, std::uint64_t seed,
                        double max_time) {
  SimConfig cfg = config;
  cfg.rng_seed = seed;
  Exp2Summary s;
  s.result = run_sim(cfg, TrackScenario{experiment_track(cfg, kind), std::nullopt}, max_time);
  s.converged = s.result.converged;
  s.mean = s.result.mean_deviation;
  s.std = s.result.deviation_std;
  return s;
}

void write_trials_csv(std::ostream& out, const Exp1Summary& summary) {
  out << "trial,final_error_m,elapsed_s\n";
  for (const auto& row : summary.trials) {
    out << row.trial << ',' << (row.converged ? format_number(row.final_error) : "nan") << ','
        << format_number(row.elapsed) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const TrialResult& result) {
  out << "t,x,y,theta,target_x,target_y,delta_d\n";
  for (const auto& r : result.log) {
    out << format_number(r.t) << ',' << format_number(r.pose.x()) << ','
        << format_number(r.pose.y()) << ',' << format_number(r.pose.theta()) << ','
        << format_number(r.target.x()) << ',' << format_number(r.target.y()) << ','
        << format_number(r.delta_d) << '\n';
  }
}

}  // namespace camnav
