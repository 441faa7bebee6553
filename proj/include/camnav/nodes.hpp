#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "camnav/harness.hpp"
#include "camnav/transport.hpp"
#include "camnav/websocket.hpp"

namespace camnav::net {

struct ControllerNodeConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = kControllerPort;  // 0 picks an ephemeral port
  RobotParams robot;
  PidConfig pid;
  double physics_dt = 1.0 / 300.0;
  double telemetry_period = 1.0 / 30.0;
  Pose2D start{2.0, 1.5, 0.0};
};

/// Robot side of the link. Hosts the simulated rover in real time, serves one
/// command connection at a time, acks every accepted cmd, and streams the
/// rover's true pose as `pose` frames (the stand-in for the overhead scene).
class ControllerNode {
 public:
  explicit ControllerNode(ControllerNodeConfig config);
  ~ControllerNode();
  ControllerNode(const ControllerNode&) = delete;
  ControllerNode& operator=(const ControllerNode&) = delete;

  void start();
  void stop();

  std::uint16_t port() const { return listener_.port(); }
  bool connected() const { return connected_.load(); }
  PlantState plant() const;
  WheelSpeeds setpoints() const;
  std::uint64_t commands_accepted() const { return accepted_.load(); }

 private:
  void run();

  ControllerNodeConfig config_;
  TcpListener listener_;
  MotorController firmware_;
  PlantState plant_;
  double now_ = 0;
  mutable std::mutex mu_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> connected_{false};
  std::atomic<std::uint64_t> accepted_{0};
  std::thread worker_;
};

struct PositioningNodeConfig {
  std::string controller_host = "127.0.0.1";
  std::uint16_t controller_port = kControllerPort;
  std::string ui_host = "0.0.0.0";
  std::uint16_t ui_port = kUiBridgePort;  // 0 picks an ephemeral port
  SimConfig sim;                          // camera, markers, steering, noise
};

/// Laptop side. Renders the camera view of the latest rover pose, runs the
/// vision pipeline and navigation at the camera rate, sends commands to the
/// controller and broadcasts the estimated pose to every UI client. UI
/// clients may send `goal` and `track` (echoed to all clients once accepted);
/// `cmd` from a UI client is refused.
class PositioningNode {
 public:
  explicit PositioningNode(PositioningNodeConfig config);
  ~PositioningNode();
  PositioningNode(const PositioningNode&) = delete;
  PositioningNode& operator=(const PositioningNode&) = delete;

  void start();
  void stop();

  std::uint16_t ui_port() const { return bridge_.port(); }
  bool controller_connected() const { return link_connected_.load(); }
  std::optional<Pose2D> estimated_pose() const;
  std::optional<WorldPoint> goal() const;
  NavPhase phase() const;

  void set_goal(const WorldPoint& goal);
  void set_track(const Track& track);

 private:
  void run();
  void handle_ui();
  void navigate(double t);

  PositioningNodeConfig config_;
  WsServer bridge_;
  std::unique_ptr<LineConnection> link_;
  SeqCounter link_seq_;
  SeqCounter ui_seq_;

  mutable std::mutex mu_;
  std::optional<Pose2D> truth_;
  std::optional<Pose2D> estimate_;
  std::optional<WorldPoint> goal_;
  std::optional<Track> track_;
  NavPhase phase_ = NavPhase::kAligning;
  std::uint64_t frame_ = 0;

  std::atomic<bool> stop_{false};
  std::atomic<bool> link_connected_{false};
  std::thread worker_;
};

}  // namespace camnav::net
