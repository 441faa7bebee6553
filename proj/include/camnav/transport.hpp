#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include "camnav/error.hpp"
#include "camnav/netlink.hpp"

namespace camnav::net {

inline constexpr std::uint16_t kControllerPort = 7011;
inline constexpr std::uint16_t kUiBridgePort = 7012;
inline constexpr std::string_view kUiBridgePath = "/ws";

/// Mutex/condvar queue. With a capacity, push() on a full queue drops the new
/// item and returns false instead of blocking the producer.
template <typename T>
class BlockingQueue {
 public:
  explicit BlockingQueue(std::size_t capacity = 0) : capacity_(capacity) {}

  bool push(T item) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return false;
      if (capacity_ != 0 && items_.size() >= capacity_) return false;
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
    return true;
  }

  /// Waits up to `timeout`; nullopt on timeout or when closed and drained.
  std::optional<T> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  std::optional<T> try_pop() { return pop(std::chrono::milliseconds(0)); }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  std::size_t capacity_;
  bool closed_ = false;
};

/// Owning TCP socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }

  /// Throws Error(kConnectionClosed) if the peer is gone.
  void send_all(std::string_view bytes) const;
  /// Up to `max` bytes. nullopt on timeout; empty string on orderly close.
  std::optional<std::string> recv_some(std::size_t max, std::chrono::milliseconds timeout) const;
  /// Exactly n bytes or throws Error(kConnectionClosed). `stop` aborts waits.
  std::string recv_exact(std::size_t n, const std::atomic<bool>& stop) const;
  /// Wakes any thread blocked on this socket.
  void shutdown() const;

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port. Throws kBindFailure.
  TcpListener(const std::string& host, std::uint16_t port);

  std::uint16_t port() const { return port_; }
  std::optional<Socket> accept(std::chrono::milliseconds timeout) const;

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

Socket connect_tcp(const std::string& host, std::uint16_t port);

/// Event delivered by a connection's reader to its consumer.
struct ConnectionEvent {
  enum class Type { kMessage, kRejected, kClosed };
  Type type = Type::kMessage;
  WireMessage message;
  ErrorCode error = ErrorCode::kFrameError;  // kRejected only
  std::string detail;
};

/// Newline-framed netlink connection over TCP: one reader thread (split,
/// decode, seq check) and one writer thread. Rejected frames (malformed,
/// unsupported, stale) are reported as events and never delivered as
/// messages.
class LineConnection {
 public:
  explicit LineConnection(Socket sock, std::size_t outbox_capacity = 0);
  ~LineConnection();
  LineConnection(const LineConnection&) = delete;
  LineConnection& operator=(const LineConnection&) = delete;

  /// Queues a message; false if the connection is closed or the outbox full.
  bool send(const WireMessage& msg);
  bool send_raw(std::string frame);

  BlockingQueue<ConnectionEvent>& events() { return events_; }
  bool open() const { return !closed_.load(); }
  void close();

 private:
  void read_loop();
  void write_loop();

  Socket sock_;
  BlockingQueue<ConnectionEvent> events_;
  BlockingQueue<std::string> outbox_;
  std::atomic<bool> closed_{false};
  std::atomic<bool> stop_{false};
  std::thread reader_;
  std::thread writer_;
};

}  // namespace camnav::net
