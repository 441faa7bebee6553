#include "camnav/nodes.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "camnav/rng.hpp"

namespace camnav::net {

namespace {

using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

constexpr auto kPollInterval = 2ms;
constexpr std::int64_t kMaxCatchUpSteps = 300;

void log_line(const char* who, const std::string& what) {
  std::fprintf(stderr, "[%s] %s\n", who, what.c_str());
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ControllerNode::ControllerNode(ControllerNodeConfig config)
    : config_(std::move(config)),
      listener_(config_.host, config_.port),
      firmware_(config_.pid, config_.robot.max_wheel_speed) {
  config_.robot.validate();
  config_.pid.validate();
  if (!(config_.physics_dt > 0) || !(config_.telemetry_period >= config_.physics_dt)) {
    throw Error(ErrorCode::kInvalidArgument, "controller: bad physics/telemetry period");
  }
  plant_.pose = config_.start;
}

ControllerNode::~ControllerNode() { stop(); }

void ControllerNode::start() {
  if (worker_.joinable()) return;
  stop_ = false;
  worker_ = std::thread([this] { run(); });
}

void ControllerNode::stop() {
  stop_ = true;
  if (worker_.joinable()) worker_.join();
}

PlantState ControllerNode::plant() const {
  std::lock_guard lock(mu_);
  return plant_;
}

WheelSpeeds ControllerNode::setpoints() const {
  std::lock_guard lock(mu_);
  return firmware_.setpoints(now_);
}

void ControllerNode::run() {
  const double dt = config_.physics_dt;
  const auto pid_steps = std::max<std::int64_t>(1, std::llround(config_.pid.period / dt));
  const auto tele_steps = std::max<std::int64_t>(1, std::llround(config_.telemetry_period / dt));

  std::unique_ptr<LineConnection> conn;
  SeqCounter seq;
  PlantState at_last_pid = plant_;
  double pwm_right = 0;
  double pwm_left = 0;
  std::int64_t step = 0;
  const auto t0 = Clock::now();

  while (!stop_) {
    if (conn && !conn->open()) {
      conn.reset();
      connected_ = false;
      log_line("controller", "command connection closed");
    }
    if (auto sock = listener_.accept(0ms)) {
      if (conn) {
        log_line("controller", "refusing second command connection");
      } else {
        conn = std::make_unique<LineConnection>(std::move(*sock), 256);
        seq = SeqCounter{};
        connected_ = true;
        log_line("controller", "command connection accepted");
      }
    }

    while (conn) {
      auto ev = conn->events().try_pop();
      if (!ev) break;
      if (ev->type == ConnectionEvent::Type::kClosed) {
        conn->close();
        break;
      }
      if (ev->type == ConnectionEvent::Type::kRejected) {
        log_line("controller", std::string(to_string(ev->error)) + ": " + ev->detail);
        continue;
      }
      const WireMessage& msg = ev->message;
      if (const auto* cmd = std::get_if<Cmd>(&msg.payload)) {
        try {
          {
            std::lock_guard lock(mu_);
            firmware_.on_command(cmd->command, now_);
          }
          ++accepted_;
          conn->send({seq.next(), Ack{msg.seq, std::nullopt}});
        } catch (const Error& e) {
          conn->send({seq.next(), ErrorReport{msg.seq, std::string(e.what())}});
        }
      } else if (!std::holds_alternative<Hello>(msg.payload)) {
        conn->send({seq.next(), ErrorReport{msg.seq, std::string("controller accepts cmd only")}});
      }
    }

    const auto target = static_cast<std::int64_t>(seconds_since(t0) / dt);
    if (target - step > kMaxCatchUpSteps) step = target - kMaxCatchUpSteps;
    while (step < target) {
      std::optional<PoseReport> report;
      {
        std::lock_guard lock(mu_);
        now_ = static_cast<double>(step) * dt;
        if (step % pid_steps == 0) {
          const WheelSpeeds measured = read_encoders(plant_, at_last_pid, config_.robot,
                                                     static_cast<double>(pid_steps) * dt);
          at_last_pid = plant_;
          std::tie(pwm_right, pwm_left) = firmware_.tick(now_, measured);
        }
        if (step % tele_steps == 0) {
          report = PoseReport{plant_.pose.x(), plant_.pose.y(), plant_.pose.theta(), now_};
        }
        plant_ = step_plant(plant_, config_.robot, pwm_right, pwm_left, dt);
      }
      if (report && conn && conn->open()) conn->send({seq.next(), *report});
      ++step;
    }
    std::this_thread::sleep_for(kPollInterval);
  }
  if (conn) conn->close();
  connected_ = false;
}

PositioningNode::PositioningNode(PositioningNodeConfig config)
    : config_(std::move(config)), bridge_(config_.ui_host, config_.ui_port) {
  config_.sim.validate();
}

PositioningNode::~PositioningNode() { stop(); }

void PositioningNode::start() {
  if (worker_.joinable()) return;
  stop_ = false;
  worker_ = std::thread([this] { run(); });
}

void PositioningNode::stop() {
  stop_ = true;
  if (worker_.joinable()) worker_.join();
  if (link_) link_->close();
}

std::optional<Pose2D> PositioningNode::estimated_pose() const {
  std::lock_guard lock(mu_);
  return estimate_;
}

std::optional<WorldPoint> PositioningNode::goal() const {
  std::lock_guard lock(mu_);
  return goal_;
}

NavPhase PositioningNode::phase() const {
  std::lock_guard lock(mu_);
  return phase_;
}

void PositioningNode::set_goal(const WorldPoint& goal) {
  if (!std::isfinite(goal.x()) || !std::isfinite(goal.y())) {
    throw Error(ErrorCode::kNonFinite, "goal must be finite");
  }
  std::lock_guard lock(mu_);
  goal_ = goal;
  track_.reset();
  phase_ = NavPhase::kAligning;
}

void PositioningNode::set_track(const Track& track) {
  std::lock_guard lock(mu_);
  track_ = track;
  goal_.reset();
}

void PositioningNode::handle_ui() {
  for (auto& [client, ev] : bridge_.poll_events()) {
    if (ev.type == ConnectionEvent::Type::kRejected) {
      log_line("positioning", std::string(to_string(ev.error)) + ": " + ev.detail);
      continue;
    }
    if (ev.type != ConnectionEvent::Type::kMessage) continue;
    const WireMessage& msg = ev.message;
    try {
      if (const auto* g = std::get_if<Goal>(&msg.payload)) {
        set_goal(WorldPoint(g->x, g->y));
        bridge_.broadcast({ui_seq_.next(), *g});
      } else if (const auto* tp = std::get_if<TrackPoints>(&msg.payload)) {
        set_track(track_from_points(*tp));
        bridge_.broadcast({ui_seq_.next(), *tp});
      } else if (std::holds_alternative<Cmd>(msg.payload)) {
        bridge_.send_to(client, {ui_seq_.next(),
                                 ErrorReport{msg.seq, std::string("ui may send goal or track only")}});
      }
    } catch (const Error& e) {
      bridge_.send_to(client, {ui_seq_.next(), ErrorReport{msg.seq, std::string(e.what())}});
    }
  }
}

void PositioningNode::navigate(double t) {
  std::optional<Pose2D> truth;
  {
    std::lock_guard lock(mu_);
    truth = truth_;
  }
  if (!truth) return;

  const SimConfig& sim = config_.sim;
  std::optional<Pose2D> seen;
  try {
    const SyntheticFrame frame = render_markers(sim.camera, *truth, sim.markers, sim.pixel_noise_std,
                                                derive_seed(sim.rng_seed, frame_++));
    seen = locate_robot(sim.camera, frame);
  } catch (const Error&) {
    seen.reset();
  }

  std::optional<MotorCommand> cmd;
  {
    std::lock_guard lock(mu_);
    estimate_ = seen;
    if (!seen) {
      if (goal_ || track_) cmd = MotorCommand::stop();
    } else if (goal_) {
      const SteerOutput out = steer_step(*seen, *goal_, phase_, sim.steer);
      phase_ = out.phase;
      cmd = out.command;
    } else if (track_) {
      cmd = tracker_step(*seen, *track_, sim.tracker);
    }
  }
  if (seen) bridge_.broadcast({ui_seq_.next(), PoseReport{seen->x(), seen->y(), seen->theta(), t}});
  if (cmd && link_ && link_->open()) link_->send({link_seq_.next(), Cmd{*cmd}});
}

void PositioningNode::run() {
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(config_.sim.camera_period));
  const auto t0 = Clock::now();
  auto next_frame = t0;
  auto next_connect = t0;

  while (!stop_) {
    if (link_ && !link_->open()) {
      link_.reset();
      link_connected_ = false;
      log_line("positioning", "controller link lost");
    }
    if (!link_ && Clock::now() >= next_connect) {
      try {
        link_ = std::make_unique<LineConnection>(
            connect_tcp(config_.controller_host, config_.controller_port), 256);
        link_seq_ = SeqCounter{};
        link_connected_ = true;
        log_line("positioning", "connected to controller");
      } catch (const Error&) {
        next_connect = Clock::now() + 500ms;
      }
    }
    while (link_) {
      auto ev = link_->events().try_pop();
      if (!ev) break;
      if (ev->type == ConnectionEvent::Type::kClosed) {
        link_->close();
        break;
      }
      if (ev->type == ConnectionEvent::Type::kRejected) continue;
      if (const auto* p = std::get_if<PoseReport>(&ev->message.payload)) {
        std::lock_guard lock(mu_);
        truth_ = Pose2D(p->x, p->y, p->theta);
      } else if (const auto* e = std::get_if<ErrorReport>(&ev->message.payload)) {
        log_line("positioning", "controller error: " + e->detail.value_or(""));
      }
    }

    handle_ui();

    if (Clock::now() >= next_frame) {
      navigate(seconds_since(t0));
      next_frame += period;
      if (next_frame < Clock::now()) next_frame = Clock::now() + period;
    }
    std::this_thread::sleep_for(kPollInterval);
  }
}

}  // namespace camnav::net
