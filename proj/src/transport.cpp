#include "camnav/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>

namespace camnav::net {

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.release();
  }
  return *this;
}

void Socket::send_all(std::string_view bytes) const {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kConnectionClosed, std::string("send: ") + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::optional<std::string> Socket::recv_some(std::size_t max,
                                             std::chrono::milliseconds timeout) const {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready == 0) return std::nullopt;
  if (ready < 0) {
    if (errno == EINTR) return std::nullopt;
    return std::string();
  }
  std::string buf(max, '\0');
  const ssize_t n = ::recv(fd_, buf.data(), max, 0);
  if (n <= 0) return std::string();
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

std::string Socket::recv_exact(std::size_t n, const std::atomic<bool>& stop) const {
  std::string out;
  out.reserve(n);
  while (out.size() < n) {
    if (stop.load()) throw Error(ErrorCode::kConnectionClosed, "recv: stopped");
    auto chunk = recv_some(n - out.size(), std::chrono::milliseconds(50));
    if (!chunk) continue;
    if (chunk->empty()) throw Error(ErrorCode::kConnectionClosed, "recv: peer closed");
    out += *chunk;
  }
  return out;
}

void Socket::shutdown() const {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res) {
      throw Error(ErrorCode::kIo, "cannot resolve host `" + host + "`");
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  return addr;
}

}  // namespace

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  sock_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!sock_.valid()) throw Error(ErrorCode::kBindFailure, "socket() failed");
  const int one = 1;
  ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(host, port);
  if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(sock_.fd(), 8) != 0) {
    throw Error(ErrorCode::kBindFailure, "cannot bind " + host + ":" + std::to_string(port) +
                                             ": " + std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

std::optional<Socket> TcpListener::accept(std::chrono::milliseconds timeout) const {
  pollfd pfd{sock_.fd(), POLLIN, 0};
  if (::poll(&pfd, 1, static_cast<int>(timeout.count())) <= 0) return std::nullopt;
  const int fd = ::accept(sock_.fd(), nullptr, nullptr);
  if (fd < 0) return std::nullopt;
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

Socket connect_tcp(const std::string& host, std::uint16_t port) {
  Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
  if (!sock.valid()) throw Error(ErrorCode::kIo, "socket() failed");
  sockaddr_in addr = resolve(host, port);
  if (::connect(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error(ErrorCode::kConnectionClosed, "cannot connect to " + host + ":" +
                                                  std::to_string(port) + ": " +
                                                  std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return sock;
}

LineConnection::LineConnection(Socket sock, std::size_t outbox_capacity)
    : sock_(std::move(sock)), outbox_(outbox_capacity) {
  reader_ = std::thread([this] { read_loop(); });
  writer_ = std::thread([this] { write_loop(); });
}

LineConnection::~LineConnection() {
  close();
  if (reader_.joinable()) reader_.join();
  if (writer_.joinable()) writer_.join();
}

void LineConnection::close() {
  stop_ = true;
  outbox_.close();
  sock_.shutdown();
}

bool LineConnection::send(const WireMessage& msg) { return send_raw(encode(msg)); }

bool LineConnection::send_raw(std::string frame) {
  if (closed_.load()) return false;
  return outbox_.push(std::move(frame));
}

void LineConnection::read_loop() {
  LineSplitter splitter;
  SeqGuard guard;
  while (!stop_.load()) {
    auto chunk = sock_.recv_some(4096, std::chrono::milliseconds(50));
    if (!chunk) continue;
    if (chunk->empty()) break;
    for (auto& line : splitter.feed(*chunk)) {
      ConnectionEvent ev;
      try {
        ev.message = decode(line);
        guard.accept(ev.message.seq);
        ev.type = ConnectionEvent::Type::kMessage;
      } catch (const Error& e) {
        ev.type = ConnectionEvent::Type::kRejected;
        ev.error = e.code();
        ev.detail = e.what();
        if (e.code() == ErrorCode::kStaleFrame) std::clog << "netlink: dropped " << e.what() << '\n';
      }
      events_.push(std::move(ev));
    }
  }
  closed_ = true;
  outbox_.close();
  events_.push(ConnectionEvent{ConnectionEvent::Type::kClosed, {}, ErrorCode::kConnectionClosed,
                               "connection closed"});
  events_.close();
}

void LineConnection::write_loop() {
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

}  // namespace camnav::net
