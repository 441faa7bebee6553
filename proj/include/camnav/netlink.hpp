#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "camnav/controller.hpp"
#include "camnav/geometry.hpp"
#include "camnav/navigation.hpp"

namespace camnav::net {

enum class MessageKind { kHello, kCmd, kPose, kGoal, kTrack, kAck, kError };

std::string_view to_string(MessageKind kind);

struct Hello {
  bool operator==(const Hello&) const = default;
};
struct Cmd {
  MotorCommand command;
  bool operator==(const Cmd&) const = default;
};
struct PoseReport {
  double x = 0;
  double y = 0;
  double theta = 0;
  double t = 0;
  bool operator==(const PoseReport&) const = default;
};
struct Goal {
  double x = 0;
  double y = 0;
  bool operator==(const Goal&) const = default;
};
struct TrackPoints {
  std::vector<double> points;  // flat x0, y0, x1, y1, ...
  bool operator==(const TrackPoints&) const = default;
};
struct Ack {
  std::uint64_t ref_seq = 0;
  std::optional<std::string> detail;
  bool operator==(const Ack&) const = default;
};
struct ErrorReport {
  std::uint64_t ref_seq = 0;
  std::optional<std::string> detail;
  bool operator==(const ErrorReport&) const = default;
};

using Payload = std::variant<Hello, Cmd, PoseReport, Goal, TrackPoints, Ack, ErrorReport>;

struct WireMessage {
  std::uint64_t seq = 0;
  Payload payload;

  MessageKind kind() const { return static_cast<MessageKind>(payload.index()); }
  bool operator==(const WireMessage&) const = default;
};

/// One newline-terminated UTF-8 line holding a flat object:
/// keys `kind`, `seq`, then the kind-specific keys. Numbers use 6
/// significant digits.
std::string encode(const WireMessage& msg);

/// Inverse of encode for one line (trailing "\n" optional). Unknown keys are
/// ignored. Throws Error(kFrameError) for malformed text or missing/invalid
/// fields, Error(kUnsupportedKind) for an unknown `kind`.
WireMessage decode(std::string_view frame);

/// Per-connection sequence check: every accepted seq must exceed the last.
class SeqGuard {
 public:
  /// Throws Error(kStaleFrame) when `seq` does not advance.
  void accept(std::uint64_t seq);
  std::optional<std::uint64_t> last() const { return last_; }

 private:
  std::optional<std::uint64_t> last_;
};

/// Monotone sequence numbers for one sender.
class SeqCounter {
 public:
  std::uint64_t next() { return ++last_; }

 private:
  std::uint64_t last_ = 0;
};

/// Reassembles newline-delimited frames from arbitrary stream chunks.
class LineSplitter {
 public:
  /// Appends bytes; returns every completed line without its "\n".
  std::vector<std::string> feed(std::string_view bytes);
  std::size_t pending() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

Track track_from_points(const TrackPoints& tp);
TrackPoints points_from_track(const Track& track);

}  // namespace camnav::net
