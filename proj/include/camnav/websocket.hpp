#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "camnav/transport.hpp"

namespace camnav::net {

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(std::string_view client_key);

enum class WsOpcode : std::uint8_t {
  kContinuation = 0x0,
  kText = 0x1,
  kBinary = 0x2,
  kClose = 0x8,
  kPing = 0x9,
  kPong = 0xA,
};

/// Serialises one final frame; clients must pass a mask, servers must not.
std::string encode_ws_frame(WsOpcode opcode, std::string_view payload,
                            const std::uint8_t* mask = nullptr);

/// Netlink over a WebSocket: one text frame per message (no trailing
/// newline). Same reader/writer split and event semantics as LineConnection;
/// the outbox is bounded so a slow peer loses frames instead of stalling the
/// sender.
class WsConnection {
 public:
  WsConnection(Socket sock, bool client_side, std::size_t outbox_capacity = 64);
  ~WsConnection();
  WsConnection(const WsConnection&) = delete;
  WsConnection& operator=(const WsConnection&) = delete;

  bool send(const WireMessage& msg);
  BlockingQueue<ConnectionEvent>& events() { return events_; }
  bool open() const { return !closed_.load(); }
  std::uint64_t dropped() const { return dropped_.load(); }
  void close();

 private:
  void read_loop();
  void write_loop();
  bool queue_frame(WsOpcode op, std::string_view payload);

  Socket sock_;
  bool client_side_;
  BlockingQueue<ConnectionEvent> events_;
  BlockingQueue<std::string> outbox_;
  std::atomic<bool> closed_{false};
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> dropped_{0};
  std::uint32_t mask_state_ = 0x9e3779b9u;
  std::thread reader_;
  std::thread writer_;
};

/// Accepts browser-compatible WebSocket upgrades on `path` and fans messages
/// out to every connected client.
class WsServer {
 public:
  WsServer(const std::string& host, std::uint16_t port, std::string path = std::string(kUiBridgePath));
  ~WsServer();

  std::uint16_t port() const { return listener_.port(); }

  /// Non-blocking fan-out; returns how many clients accepted the frame.
  std::size_t broadcast(const WireMessage& msg);
  std::size_t client_count();

  struct ClientEvent {
    std::uint64_t client_id;
    ConnectionEvent event;
  };
  /// Drains pending events from every client and forgets closed clients.
  std::vector<ClientEvent> poll_events();
  /// Sends to one client.
  bool send_to(std::uint64_t client_id, const WireMessage& msg);

 private:
  void accept_loop();

  struct Client {
    std::uint64_t id;
    std::unique_ptr<WsConnection> conn;
  };

  TcpListener listener_;
  std::string path_;
  std::atomic<bool> stop_{false};
  std::mutex mu_;
  std::list<Client> clients_;
  std::uint64_t next_id_ = 1;
  std::thread acceptor_;
};

/// Opens a client connection (performs the upgrade handshake).
std::unique_ptr<WsConnection> connect_ws(const std::string& host, std::uint16_t port,
                                         std::string_view path = kUiBridgePath);

}  // namespace camnav::net
