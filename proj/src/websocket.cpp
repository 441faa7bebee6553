#include "camnav/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>
#include <sstream>

namespace camnav::net {

namespace {

constexpr std::string_view kWsGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxFramePayload = 1 << 20;

std::string base64(const unsigned char* data, std::size_t n) {
  std::string out(4 * ((n + 2) / 3), '\0');
  const int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data,
                                  static_cast<int>(n));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

struct HttpHead {
  std::string start_line;
  std::vector<std::pair<std::string, std::string>> headers;  // lower-case names

  std::string header(std::string_view name) const {
    for (const auto& [k, v] : headers) {
      if (k == name) return v;
    }
    return {};
  }
};

HttpHead read_http_head(const Socket& sock, const std::atomic<bool>& stop) {
  std::string raw;
  while (raw.size() < 4 || raw.compare(raw.size() - 4, 4, "\r\n\r\n") != 0) {
    raw += sock.recv_exact(1, stop);
    if (raw.size() > 8192) throw Error(ErrorCode::kFrameError, "websocket: header too large");
  }
  HttpHead head;
  std::istringstream in(raw);
  std::string line;
  std::getline(in, head.start_line);
  head.start_line = trim(head.start_line);
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) break;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    head.headers.emplace_back(lower(trim(std::string_view(line).substr(0, colon))),
                              trim(std::string_view(line).substr(colon + 1)));
  }
  return head;
}

void server_handshake(const Socket& sock, std::string_view path, const std::atomic<bool>& stop) {
  const HttpHead head = read_http_head(sock, stop);
  std::istringstream start(head.start_line);
  std::string method, target;
  start >> method >> target;
  const std::string key = head.header("sec-websocket-key");
  const bool upgrade = lower(head.header("upgrade")) == "websocket";
  if (method != "GET" || target != path || !upgrade || key.empty()) {
    sock.send_all("HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
    throw Error(ErrorCode::kFrameError, "websocket: bad upgrade request for `" + target + "`");
  }
  sock.send_all("HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\n"
                "Connection: Upgrade\r\nSec-WebSocket-Accept: " +
                websocket_accept_key(key) + "\r\n\r\n");
}

}  // namespace

std::string websocket_accept_key(std::string_view client_key) {
  std::string material(client_key);
  material += kWsGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest);
  return base64(digest, sizeof digest);
}

std::string encode_ws_frame(WsOpcode opcode, std::string_view payload, const std::uint8_t* mask) {
  std::string out;
  out.reserve(payload.size() + 14);
  out += static_cast<char>(0x80 | static_cast<std::uint8_t>(opcode));
  const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
  const std::size_t n = payload.size();
  if (n < 126) {
    out += static_cast<char>(mask_bit | n);
  } else if (n <= 0xFFFF) {
    out += static_cast<char>(mask_bit | 126);
    out += static_cast<char>((n >> 8) & 0xFF);
    out += static_cast<char>(n & 0xFF);
  } else {
    out += static_cast<char>(mask_bit | 127);
    for (int shift = 56; shift >= 0; shift -= 8) out += static_cast<char>((n >> shift) & 0xFF);
  }
  if (mask) {
    out.append(reinterpret_cast<const char*>(mask), 4);
    for (std::size_t i = 0; i < n; ++i) out += static_cast<char>(payload[i] ^ mask[i % 4]);
  } else {
    out.append(payload);
  }
  return out;
}

WsConnection::WsConnection(Socket sock, bool client_side, std::size_t outbox_capacity)
    : sock_(std::move(sock)), client_side_(client_side), outbox_(outbox_capacity) {
  reader_ = std::thread([this] { read_loop(); });
  writer_ = std::thread([this] { write_loop(); });
}

WsConnection::~WsConnection() {
  close();
  if (reader_.joinable()) reader_.join();
  if (writer_.joinable()) writer_.join();
}

void WsConnection::close() {
  stop_ = true;
  outbox_.close();
  sock_.shutdown();
}

bool WsConnection::queue_frame(WsOpcode op, std::string_view payload) {
  if (closed_.load()) return false;
  std::string frame;
  if (client_side_) {
    // Masking only has to be unpredictable to intermediaries, not secret.
    mask_state_ = mask_state_ * 1664525u + 1013904223u;
    const std::uint8_t mask[4] = {
        static_cast<std::uint8_t>(mask_state_ >> 24), static_cast<std::uint8_t>(mask_state_ >> 16),
        static_cast<std::uint8_t>(mask_state_ >> 8), static_cast<std::uint8_t>(mask_state_)};
    frame = encode_ws_frame(op, payload, mask);
  } else {
    frame = encode_ws_frame(op, payload);
  }
  if (!outbox_.push(std::move(frame))) {
    ++dropped_;
    return false;
  }
  return true;
}

bool WsConnection::send(const WireMessage& msg) {
  std::string text = encode(msg);
  text.pop_back();  // one message per frame, no newline
  return queue_frame(WsOpcode::kText, text);
}

void WsConnection::read_loop() {
  SeqGuard guard;
  std::string message;
  try {
    while (!stop_.load()) {
      const std::string hdr = sock_.recv_exact(2, stop_);
      const bool fin = (static_cast<std::uint8_t>(hdr[0]) & 0x80) != 0;
      const auto opcode = static_cast<WsOpcode>(static_cast<std::uint8_t>(hdr[0]) & 0x0F);
      const bool masked = (static_cast<std::uint8_t>(hdr[1]) & 0x80) != 0;
      std::uint64_t len = static_cast<std::uint8_t>(hdr[1]) & 0x7F;
      if (len == 126) {
        const std::string ext = sock_.recv_exact(2, stop_);
        len = (std::uint64_t{static_cast<std::uint8_t>(ext[0])} << 8) |
              static_cast<std::uint8_t>(ext[1]);
      } else if (len == 127) {
        const std::string ext = sock_.recv_exact(8, stop_);
        len = 0;
        for (char c : ext) len = (len << 8) | static_cast<std::uint8_t>(c);
      }
      if (len > kMaxFramePayload) throw Error(ErrorCode::kFrameError, "websocket: frame too large");
      std::string mask;
      if (masked) mask = sock_.recv_exact(4, stop_);
      std::string payload = sock_.recv_exact(static_cast<std::size_t>(len), stop_);
      if (masked) {
        for (std::size_t i = 0; i < payload.size(); ++i) payload[i] ^= mask[i % 4];
      }

      if (opcode == WsOpcode::kClose) {
        queue_frame(WsOpcode::kClose, {});
        break;
      }
      if (opcode == WsOpcode::kPing) {
        queue_frame(WsOpcode::kPong, payload);
        continue;
      }
      if (opcode == WsOpcode::kPong) continue;
      message += payload;
      if (!fin) continue;

      ConnectionEvent ev;
      try {
        ev.message = decode(message);
        guard.accept(ev.message.seq);
        ev.type = ConnectionEvent::Type::kMessage;
      } catch (const Error& e) {
        ev.type = ConnectionEvent::Type::kRejected;
        ev.error = e.code();
        ev.detail = e.what();
      }
      message.clear();
      events_.push(std::move(ev));
    }
  } catch (const Error&) {
    // peer gone or protocol violation; fall through to close
  }
  closed_ = true;
  outbox_.close();
  events_.push(ConnectionEvent{ConnectionEvent::Type::kClosed, {}, ErrorCode::kConnectionClosed,
                               "connection closed"});
  events_.close();
}

void WsConnection::write_loop() {
  while (true) {
    auto frame = outbox_.pop(std::chrono::milliseconds(100));
    if (!frame) {
      if (outbox_.closed()) break;
      continue;
    }
    try {
      sock_.send_all(*frame);
    } catch (const Error&) {
      closed_ = true;
      sock_.shutdown();
      break;
    }
  }
}

WsServer::WsServer(const std::string& host, std::uint16_t port, std::string path)
    : listener_(host, port), path_(std::move(path)) {
  acceptor_ = std::thread([this] { accept_loop(); });
}

WsServer::~WsServer() {
  stop_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  std::lock_guard lock(mu_);
  clients_.clear();
}

void WsServer::accept_loop() {
  while (!stop_.load()) {
    auto sock = listener_.accept(std::chrono::milliseconds(50));
    if (!sock) continue;
    try {
      server_handshake(*sock, path_, stop_);
    } catch (const Error&) {
      continue;
    }
    std::lock_guard lock(mu_);
    clients_.push_back({next_id_++, std::make_unique<WsConnection>(std::move(*sock), false)});
  }
}

std::size_t WsServer::broadcast(const WireMessage& msg) {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (auto& c : clients_) {
    if (c.conn->open() && c.conn->send(msg)) ++n;
  }
  return n;
}

std::size_t WsServer::client_count() {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(clients_.begin(), clients_.end(), [](const Client& c) { return c.conn->open(); }));
}

bool WsServer::send_to(std::uint64_t client_id, const WireMessage& msg) {
  std::lock_guard lock(mu_);
  for (auto& c : clients_) {
    if (c.id == client_id) return c.conn->send(msg);
  }
  return false;
}

std::vector<WsServer::ClientEvent> WsServer::poll_events() {
  std::vector<ClientEvent> out;
  std::lock_guard lock(mu_);
  for (auto it = clients_.begin(); it != clients_.end();) {
    bool closed = false;
    while (auto ev = it->conn->events().try_pop()) {
      closed = closed || ev->type == ConnectionEvent::Type::kClosed;
      out.push_back({it->id, std::move(*ev)});
    }
    if (closed) {
      it = clients_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

std::unique_ptr<WsConnection> connect_ws(const std::string& host, std::uint16_t port,
                                         std::string_view path) {
  Socket sock = connect_tcp(host, port);
  unsigned char nonce[16];
  std::uint64_t seed = reinterpret_cast<std::uintptr_t>(&sock) ^
                       static_cast<std::uint64_t>(
                           std::chrono::steady_clock::now().time_since_epoch().count());
  for (auto& b : nonce) {
    seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    b = static_cast<unsigned char>(seed >> 56);
  }
  const std::string key = base64(nonce, sizeof nonce);
  sock.send_all("GET " + std::string(path) + " HTTP/1.1\r\nHost: " + host + ":" +
                std::to_string(port) +
                "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                "Sec-WebSocket-Version: 13\r\nSec-WebSocket-Key: " +
                key + "\r\n\r\n");
  std::atomic<bool> stop{false};
  const HttpHead head = read_http_head(sock, stop);
  if (head.start_line.find(" 101") == std::string::npos ||
      head.header("sec-websocket-accept") != websocket_accept_key(key)) {
    throw Error(ErrorCode::kConnectionClosed, "websocket: upgrade refused: " + head.start_line);
  }
  return std::make_unique<WsConnection>(std::move(sock), true);
}

}  // namespace camnav::net
