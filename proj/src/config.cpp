#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "camnav/harness.hpp"

namespace camnav {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument,
                "config: `" + key + "` expects a finite number, got `" + value + "`");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.front() == '-') {
    throw Error(ErrorCode::kInvalidArgument,
                "config: `" + key + "` expects a non-negative integer, got `" + value + "`");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Setter = std::function<void(SimConfig&, const std::string&, const std::string&)>;

template <typename T>
Setter number(T SimConfig::*field) {
  return [field](SimConfig& c, const std::string& k, const std::string& v) {
    c.*field = static_cast<T>(parse_double(k, v));
  };
}

template <typename S>
Setter nested(S SimConfig::*sub, double S::*field) {
  return [sub, field](SimConfig& c, const std::string& k, const std::string& v) {
    (c.*sub).*field = parse_double(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"physics_dt", number(&SimConfig::physics_dt)},
      {"pid_period",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.pid_period = parse_double(k, v);
         c.pid.period = c.pid_period;
       }},
      {"camera_period", number(&SimConfig::camera_period)},
      {"pixel_noise_std", number(&SimConfig::pixel_noise_std)},
      {"command_latency", number(&SimConfig::command_latency)},
      {"rng_seed",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.rng_seed = parse_uint(k, v);
       }},
      {"arena_width", number(&SimConfig::arena_width)},
      {"arena_height", number(&SimConfig::arena_height)},
      {"goal_margin", number(&SimConfig::goal_margin)},
      {"settle_time", number(&SimConfig::settle_time)},
      {"settle_speed", number(&SimConfig::settle_speed)},
      {"track_amplitude", number(&SimConfig::track_amplitude)},
      {"track_span", number(&SimConfig::track_span)},
      {"track_samples",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.track_samples = static_cast<std::size_t>(parse_uint(k, v));
       }},

      {"robot.wheel_radius", nested(&SimConfig::robot, &RobotParams::wheel_radius)},
      {"robot.track_width", nested(&SimConfig::robot, &RobotParams::track_width)},
      {"robot.max_wheel_speed", nested(&SimConfig::robot, &RobotParams::max_wheel_speed)},
      {"robot.motor_time_constant", nested(&SimConfig::robot, &RobotParams::motor_time_constant)},
      {"robot.encoder_ticks_per_rev",
       nested(&SimConfig::robot, &RobotParams::encoder_ticks_per_rev)},
      {"robot.pwm_full_scale", nested(&SimConfig::robot, &RobotParams::pwm_full_scale)},

      {"pid.kp", nested(&SimConfig::pid, &PidConfig::kp)},
      {"pid.kd", nested(&SimConfig::pid, &PidConfig::kd)},
      {"pid.ki", nested(&SimConfig::pid, &PidConfig::ki)},
      {"pid.l_anti", nested(&SimConfig::pid, &PidConfig::l_anti)},
      {"pid.alpha_decay", nested(&SimConfig::pid, &PidConfig::alpha_decay)},
      {"pid.beta_anti", nested(&SimConfig::pid, &PidConfig::beta_anti)},
      {"pid.output_limit", nested(&SimConfig::pid, &PidConfig::output_limit)},
      {"pid.period",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.pid.period = parse_double(k, v);
         c.pid_period = c.pid.period;
       }},

      {"steer.accept_radius", nested(&SimConfig::steer, &GoalSteerConfig::accept_radius)},
      {"steer.align_tolerance", nested(&SimConfig::steer, &GoalSteerConfig::align_tolerance)},
      {"steer.turn_speed", nested(&SimConfig::steer, &GoalSteerConfig::turn_speed)},
      {"steer.forward_speed", nested(&SimConfig::steer, &GoalSteerConfig::forward_speed)},

      {"tracker.theta_d", nested(&SimConfig::tracker, &TrackerConfig::theta_d)},
      {"tracker.v_m", nested(&SimConfig::tracker, &TrackerConfig::v_m)},
      {"tracker.kp_t", nested(&SimConfig::tracker, &TrackerConfig::kp_t)},
      {"tracker.end_radius", nested(&SimConfig::tracker, &TrackerConfig::end_radius)},
      {"tracker.lookahead", nested(&SimConfig::tracker, &TrackerConfig::lookahead)},

      {"camera.scale", nested(&SimConfig::camera, &CameraModel::scale)},
      {"camera.origin_x", nested(&SimConfig::camera, &CameraModel::origin_x)},
      {"camera.origin_y", nested(&SimConfig::camera, &CameraModel::origin_y)},
      {"camera.image_width",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.camera.image_width = static_cast<int>(parse_uint(k, v));
       }},
      {"camera.image_height",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.camera.image_height = static_cast<int>(parse_uint(k, v));
       }},

      {"markers.green_x",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.markers.green_offset.x() = parse_double(k, v);
       }},
      {"markers.green_y",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.markers.green_offset.y() = parse_double(k, v);
       }},
      {"markers.orange_x",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.markers.orange_offset.x() = parse_double(k, v);
       }},
      {"markers.orange_y",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.markers.orange_offset.y() = parse_double(k, v);
       }},
      {"markers.disc_radius", nested(&SimConfig::markers, &MarkerLayout::disc_radius)},
  };
  return table;
}

}  // namespace

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  for (const auto& [k, v] : extra) {
    if (k == key) return v;
  }
  return std::nullopt;
}

ConfigFile load_config(std::istream& in, const std::vector<std::string>& extra_keys) {
  ConfigFile file;
  bool camera_given = false;
  bool arena_given = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "config: expected `key = value` on line " + std::to_string(lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(extra_keys.begin(), extra_keys.end(), key) != extra_keys.end()) {
      file.extra.emplace_back(key, value);
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw Error(ErrorCode::kInvalidArgument, "config: unknown key `" + key + "`");
    }
    it->second(file.config, key, value);
    camera_given = camera_given || key == "camera.scale" || key == "camera.origin_x" ||
                   key == "camera.origin_y";
    arena_given = arena_given || key.rfind("arena_", 0) == 0 || key.rfind("camera.image_", 0) == 0;
  }
  if (arena_given && !camera_given) file.config.fit_camera_to_arena();
  file.config.validate();
  return file;
}

std::vector<std::string> scenario_config_keys() {
  return {"scenario", "start_x", "start_y", "start_theta", "goal_x",
          "goal_y",   "track_kind", "track_file", "max_time"};
}

Scenario scenario_from_config(const ConfigFile& file) {
  const std::string kind = file.get("scenario").value_or("goal");
  auto num = [&](const char* key) -> std::optional<double> {
    if (auto v = file.get(key)) return parse_double(key, *v);
    return std::nullopt;
  };
  std::optional<Pose2D> start;
  if (num("start_x") || num("start_y") || num("start_theta")) {
    start = Pose2D(num("start_x").value_or(file.config.arena_width / 2),
                   num("start_y").value_or(file.config.arena_height / 2),
                   num("start_theta").value_or(0.0));
  }
  if (kind == "goal") {
    const auto gx = num("goal_x");
    const auto gy = num("goal_y");
    if (!gx || !gy) {
      throw Error(ErrorCode::kInvalidArgument, "config: goal scenario needs goal_x and goal_y");
    }
    return GoalScenario{start.value_or(Pose2D(file.config.arena_width / 2,
                                              file.config.arena_height / 2, 0.0)),
                        WorldPoint(*gx, *gy)};
  }
  if (kind == "track") {
    if (const auto path = file.get("track_file")) {
      std::ifstream in(*path);
      if (!in) throw Error(ErrorCode::kIo, "config: cannot open track file `" + *path + "`");
      return TrackScenario{read_track(in), start};
    }
    const std::string tk = file.get("track_kind").value_or("half");
    const auto parsed = parse_track_kind(tk);
    if (!parsed) throw Error(ErrorCode::kInvalidArgument, "config: unknown track_kind `" + tk + "`");
    return TrackScenario{experiment_track(file.config, *parsed), start};
  }
  throw Error(ErrorCode::kInvalidArgument, "config: scenario must be `goal` or `track`");
}

}  // namespace camnav
