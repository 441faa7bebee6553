#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "camnav/calibration.hpp"
#include "camnav/format.hpp"
#include "camnav/harness.hpp"
#include "camnav/nodes.hpp"

namespace fs = std::filesystem;
using namespace camnav;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void wait_for_signal() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

SimConfig base_config(const std::string& path, bool noise_free) {
  SimConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open config `" + path + "`");
    cfg = load_config(in).config;
  }
  if (noise_free) {
    cfg.pixel_noise_std = 0;
    cfg.command_latency = 0;
  }
  return cfg;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path p = fs::path(dir) / name;
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIo, "cannot write `" + p.string() + "`");
  return out;
}

void print_summary(double mean, double std) {
  std::printf("mean=%s std=%s\n", format_number(mean).c_str(), format_number(std).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camera-guided differential-drive robot: simulation, experiments and live nodes"};
  app.require_subcommand(1);

  std::string pairs_file;
  auto* cal = app.add_subcommand("calibrate", "Fit the camera model to `X Y u v` correspondences");
  cal->add_option("pairs-file", pairs_file)->required()->check(CLI::ExistingFile);

  int trials = 50;
  std::uint64_t seed = 1;
  bool noise_free = false;
  std::string config_path;
  std::string out_dir = ".";
  auto* exp1 = app.add_subcommand("exp1", "Random goal-reaching trials");
  exp1->add_option("--trials", trials)->check(CLI::PositiveNumber);
  exp1->add_option("--seed", seed);
  exp1->add_flag("--noise-free", noise_free, "No pixel noise and no link latency");
  exp1->add_option("--config", config_path)->check(CLI::ExistingFile);
  exp1->add_option("--out", out_dir, "Directory for trials.csv");

  std::string kind_name = "half";
  auto* exp2 = app.add_subcommand("exp2", "Track following on a sine (or straight) track");
  exp2->add_option("--kind", kind_name)
      ->check(CLI::IsMember({"half", "three-quarter", "full", "straight"}));
  exp2->add_option("--seed", seed);
  exp2->add_flag("--noise-free", noise_free, "No pixel noise and no link latency");
  exp2->add_option("--config", config_path)->check(CLI::ExistingFile);
  exp2->add_option("--out", out_dir, "Directory for trajectory.csv");

  std::string host = "127.0.0.1";
  std::uint16_t port = net::kControllerPort;
  auto* ctl = app.add_subcommand("serve-controller", "Run the robot controller node");
  ctl->add_option("--port", port);
  ctl->add_option("--host", host);

  std::uint16_t ui_port = net::kUiBridgePort;
  std::string ui_host = "0.0.0.0";
  auto* pos = app.add_subcommand("serve-positioning",
                                 "Run the positioning/navigation node (connects to the controller)");
  pos->add_option("--port", port, "Controller port");
  pos->add_option("--host", host, "Controller host");
  pos->add_option("--ui-port", ui_port, "WebSocket bridge port (path /ws)");
  pos->add_option("--ui-host", ui_host);
  pos->add_option("--config", config_path)->check(CLI::ExistingFile);

  auto* sim = app.add_subcommand("sim", "Run one scenario from a config file");
  sim->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Directory for trajectory.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cal) {
      std::ifstream in(pairs_file);
      const CalibrationResult r = calibrate(read_calibration_pairs(in));
      std::printf("scale=%s origin_x=%s origin_y=%s residual_rms=%s\n",
                  format_number(r.camera.scale).c_str(), format_number(r.camera.origin_x).c_str(),
                  format_number(r.camera.origin_y).c_str(), format_number(r.residual_rms).c_str());
    } else if (*exp1) {
      const SimConfig cfg = base_config(config_path, noise_free);
      const Exp1Summary s = experiment1(cfg, trials, seed);
      auto out = open_output(out_dir, "trials.csv");
      write_trials_csv(out, s);
      if (s.failed > 0) std::fprintf(stderr, "%d of %d trials did not converge\n", s.failed, trials);
      print_summary(s.mean, s.std);
      return s.failed == 0 ? 0 : 2;
    } else if (*exp2) {
      const SimConfig cfg = base_config(config_path, noise_free);
      const Exp2Summary s = experiment2(cfg, *parse_track_kind(kind_name), seed);
      auto out = open_output(out_dir, "trajectory.csv");
      write_trajectory_csv(out, s.result);
      if (!s.converged) std::fprintf(stderr, "track not completed\n");
      print_summary(s.mean, s.std);
      return s.converged ? 0 : 2;
    } else if (*sim) {
      std::ifstream in(config_path);
      const ConfigFile file = load_config(in, scenario_config_keys());
      double max_time = 600.0;
      if (auto v = file.get("max_time")) max_time = std::stod(*v);
      const Scenario scenario = scenario_from_config(file);
      const TrialResult r = run_sim(file.config, scenario, max_time);
      auto out = open_output(out_dir, "trajectory.csv");
      write_trajectory_csv(out, r);
      if (!r.converged) std::fprintf(stderr, "scenario did not finish within max_time\n");
      if (std::holds_alternative<GoalScenario>(scenario)) {
        print_summary(r.final_error, 0.0);
      } else {
        print_summary(r.mean_deviation, r.deviation_std);
      }
      return r.converged ? 0 : 2;
    } else if (*ctl) {
      net::ControllerNodeConfig cfg;
      cfg.host = host;
      cfg.port = port;
      net::ControllerNode node(cfg);
      node.start();
      std::fprintf(stderr, "controller listening on %s:%u\n", host.c_str(), node.port());
      wait_for_signal();
      node.stop();
    } else if (*pos) {
      net::PositioningNodeConfig cfg;
      cfg.controller_host = host;
      cfg.controller_port = port;
      cfg.ui_host = ui_host;
      cfg.ui_port = ui_port;
      cfg.sim = base_config(config_path, false);
      net::PositioningNode node(cfg);
      node.start();
      std::fprintf(stderr, "ui bridge on ws://%s:%u/ws\n", ui_host.c_str(), node.ui_port());
      wait_for_signal();
      node.stop();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
