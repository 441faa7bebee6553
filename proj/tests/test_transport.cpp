#include <doctest.h>

#include <chrono>
#include <thread>

#include "camnav/nodes.hpp"
#include "camnav/transport.hpp"
#include "camnav/websocket.hpp"
#include "net_support.hpp"

using namespace camnav;
using namespace camnav::net;
using namespace std::chrono_literals;

namespace {

std::optional<WireMessage> next_message(BlockingQueue<ConnectionEvent>& q,
                                        std::chrono::milliseconds timeout = 2000ms) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    auto ev = q.pop(20ms);
    if (ev && ev->type == ConnectionEvent::Type::kMessage) return ev->message;
  }
  return std::nullopt;
}

// Next message of type T, skipping others (pose telemetry).
template <typename T>
std::optional<WireMessage> next_of(BlockingQueue<ConnectionEvent>& q,
                                   std::chrono::milliseconds timeout = 2000ms) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    auto m = next_message(q, 50ms);
    if (m && std::holds_alternative<T>(m->payload)) return m;
  }
  return std::nullopt;
}

template <typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = 3000ms) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(5ms);
  }
  return pred();
}

ControllerNodeConfig ephemeral_controller() {
  ControllerNodeConfig cfg;
  cfg.port = 0;
  return cfg;
}

}  // namespace

TEST_CASE("websocket accept key") {
  CHECK(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST_CASE("websocket frame header lengths") {
  CHECK(encode_ws_frame(WsOpcode::kText, "hi") == std::string("\x81\x02hi", 4));
  const std::string mid(300, 'a');
  const std::string f = encode_ws_frame(WsOpcode::kText, mid);
  CHECK(static_cast<unsigned char>(f[1]) == 126);
  CHECK(f.size() == 4 + 300);
  const std::string big(70000, 'b');
  CHECK(encode_ws_frame(WsOpcode::kBinary, big).size() == 10 + 70000);
}

TEST_CASE("line connection round trip over TCP") {
  TcpListener listener("127.0.0.1", 0);
  LineConnection client(connect_tcp("127.0.0.1", listener.port()));
  auto sock = listener.accept(2000ms);
  REQUIRE(sock);
  LineConnection server(std::move(*sock));

  Rng rng(17);
  std::vector<WireMessage> sent;
  for (std::uint64_t i = 1; i <= 1000; ++i) {
    sent.push_back(testing::random_message(rng, i));
    REQUIRE(client.send(sent.back()));
  }
  std::vector<WireMessage> got;
  while (got.size() < sent.size()) {
    auto m = next_message(server.events());
    if (!m) break;
    got.push_back(*m);
  }
  CHECK(got == sent);

  client.close();
  CHECK(eventually([&] { return !server.open(); }));
}

TEST_CASE("stale and malformed frames are reported, never delivered") {
  TcpListener listener("127.0.0.1", 0);
  LineConnection client(connect_tcp("127.0.0.1", listener.port()));
  auto sock = listener.accept(2000ms);
  REQUIRE(sock);
  LineConnection server(std::move(*sock));

  client.send({5, Cmd{MotorCommand::forward()}});
  client.send({3, Cmd{MotorCommand::stop()}});
  client.send_raw("garbage\n");
  client.send({6, Cmd{MotorCommand::stop()}});

  std::vector<ConnectionEvent> events;
  while (events.size() < 4) {
    auto ev = server.events().pop(2000ms);
    if (!ev) break;
    events.push_back(*ev);
  }
  REQUIRE(events.size() == 4);
  CHECK(events[0].type == ConnectionEvent::Type::kMessage);
  CHECK(events[0].message.seq == 5);
  CHECK(events[1].type == ConnectionEvent::Type::kRejected);
  CHECK(events[1].error == ErrorCode::kStaleFrame);
  CHECK(events[2].type == ConnectionEvent::Type::kRejected);
  CHECK(events[2].error == ErrorCode::kFrameError);
  CHECK(events[3].type == ConnectionEvent::Type::kMessage);
  CHECK(events[3].message.seq == 6);
}

TEST_CASE("controller acks each cmd with its seq and refuses out-of-range speeds") {
  ControllerNode node(ephemeral_controller());
  node.start();
  LineConnection link(connect_tcp("127.0.0.1", node.port()));

  link.send({7, Cmd{MotorCommand::stop()}});
  auto ack = next_of<Ack>(link.events());
  REQUIRE(ack);
  CHECK(std::get<Ack>(ack->payload).ref_seq == 7);

  link.send({8, Cmd{MotorCommand::speed(500, 0)}});
  auto err = next_of<ErrorReport>(link.events());
  REQUIRE(err);
  CHECK(std::get<ErrorReport>(err->payload).ref_seq == 8);

  // A stale cmd gets no ack; the next fresh one does.
  link.send({2, Cmd{MotorCommand::forward()}});
  link.send({9, Cmd{MotorCommand::stop()}});
  ack = next_of<Ack>(link.events());
  REQUIRE(ack);
  CHECK(std::get<Ack>(ack->payload).ref_seq == 9);
  CHECK(node.commands_accepted() == 2);
  node.stop();
}

TEST_CASE("controller streams pose telemetry and moves on forward") {
  ControllerNode node(ephemeral_controller());
  node.start();
  LineConnection link(connect_tcp("127.0.0.1", node.port()));
  const auto first = next_of<PoseReport>(link.events());
  REQUIRE(first);
  SeqCounter seq;
  for (int i = 0; i < 10; ++i) {
    link.send({seq.next(), Cmd{MotorCommand::forward()}});
    std::this_thread::sleep_for(100ms);
  }
  const PlantState p = node.plant();
  CHECK(p.omega_right > 1.0);
  CHECK(p.pose.y() > 1.5);
  node.stop();
}

TEST_CASE("losing the command link zeroes setpoints within the dead-man timeout") {
  ControllerNode node(ephemeral_controller());
  node.start();
  {
    LineConnection link(connect_tcp("127.0.0.1", node.port()));
    link.send({1, Cmd{MotorCommand::forward()}});
    REQUIRE(eventually([&] { return node.setpoints() == WheelSpeeds{10, 10}; }));
    link.close();
  }
  const auto lost = std::chrono::steady_clock::now();
  REQUIRE(eventually([&] { return node.setpoints() == WheelSpeeds{0, 0}; }, 2000ms));
  const auto waited = std::chrono::steady_clock::now() - lost;
  CHECK(waited <= 600ms);
  CHECK(eventually([&] { return !node.connected(); }));
  node.stop();
}

TEST_CASE("positioning node: broadcast, goal echo, cmd refusal, driving to a goal") {
  ControllerNode controller(ephemeral_controller());
  controller.start();
  PositioningNodeConfig pcfg;
  pcfg.controller_port = controller.port();
  pcfg.ui_host = "127.0.0.1";
  pcfg.ui_port = 0;
  pcfg.sim.pixel_noise_std = 0;
  PositioningNode positioning(pcfg);
  positioning.start();

  auto a = connect_ws("127.0.0.1", positioning.ui_port());
  auto b = connect_ws("127.0.0.1", positioning.ui_port());
  REQUIRE(eventually([&] { return positioning.controller_connected(); }));

  // Both clients see the same pose frames.
  std::vector<WireMessage> from_a, from_b;
  while (from_a.size() < 10) {
    auto m = next_of<PoseReport>(a->events());
    REQUIRE(m);
    from_a.push_back(*m);
  }
  while (from_b.empty() || from_b.back().seq < from_a.back().seq) {
    auto m = next_of<PoseReport>(b->events());
    REQUIRE(m);
    from_b.push_back(*m);
  }
  std::size_t matched = 0;
  for (const auto& ma : from_a) {
    for (const auto& mb : from_b) matched += (ma == mb);
  }
  CHECK(matched >= 9);

  // A cmd from the UI is refused.
  a->send({1, Cmd{MotorCommand::forward()}});
  auto refused = next_of<ErrorReport>(a->events());
  REQUIRE(refused);
  CHECK(std::get<ErrorReport>(refused->payload).ref_seq == 1);

  // A goal is echoed to every client and the rover drives there.
  b->send({1, Goal{2.0, 1.9}});
  auto echo_a = next_of<Goal>(a->events());
  auto echo_b = next_of<Goal>(b->events());
  REQUIRE(echo_a);
  REQUIRE(echo_b);
  CHECK(std::get<Goal>(echo_a->payload) == Goal{2.0, 1.9});
  CHECK(eventually([&] { return positioning.phase() == NavPhase::kDone; }, 15000ms));
  const PlantState p = controller.plant();
  CHECK((p.pose.position() - WorldPoint(2.0, 1.9)).norm() < 0.15);

  positioning.stop();
  controller.stop();
}
