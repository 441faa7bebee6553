#include "camnav/netlink.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "camnav/format.hpp"

namespace camnav::net {

namespace {

using nlohmann::json;

constexpr std::string_view kKindNames[] = {"hello", "cmd", "pose", "goal",
                                           "track", "ack", "error"};

std::string_view cmd_name(CommandKind k) {
  switch (k) {
    case CommandKind::kTurn: return "turn";
    case CommandKind::kForward: return "forward";
    case CommandKind::kStop: return "stop";
    case CommandKind::kSpeed: return "speed";
  }
  return "stop";
}

class ObjectWriter {
 public:
  explicit ObjectWriter(std::string& out) : out_(out) { out_ += '{'; }

  void key(std::string_view k) {
    if (!first_) out_ += ',';
    first_ = false;
    out_ += '"';
    out_ += k;
    out_ += "\":";
  }
  void number(std::string_view k, double v) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "encode: non-finite field `" + std::string(k) + "`");
    }
    key(k);
    out_ += format_number(v);
  }
  void integer(std::string_view k, std::uint64_t v) {
    key(k);
    out_ += std::to_string(v);
  }
  void string(std::string_view k, std::string_view v) {
    key(k);
    out_ += json(std::string(v)).dump();
  }
  void close() { out_ += '}'; }

 private:
  std::string& out_;
  bool first_ = true;
};

[[noreturn]] void frame_error(const std::string& what) {
  throw Error(ErrorCode::kFrameError, "decode: " + what);
}

const json& require(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) frame_error(std::string("missing key `") + key + "`");
  return *it;
}

double number_field(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number()) frame_error(std::string("`") + key + "` is not a number");
  return v.get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number()) frame_error(std::string("`") + key + "` is not a number");
  return it->get<double>();
}

std::uint64_t uint_field(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    frame_error(std::string("`") + key + "` is not a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_string()) frame_error(std::string("`") + key + "` is not a string");
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::string encode(const WireMessage& msg) {
  std::string out;
  out.reserve(64);
  ObjectWriter w(out);
  w.string("kind", to_string(msg.kind()));
  w.integer("seq", msg.seq);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Cmd>) {
          w.string("cmd", cmd_name(p.command.kind));
          if (p.command.speeds && p.command.kind != CommandKind::kStop) {
            w.number("u_right", p.command.speeds->right);
            w.number("u_left", p.command.speeds->left);
          } else if (p.command.kind == CommandKind::kSpeed) {
            throw Error(ErrorCode::kInvalidArgument, "encode: speed cmd without speeds");
          }
        } else if constexpr (std::is_same_v<T, PoseReport>) {
          w.number("x", p.x);
          w.number("y", p.y);
          w.number("theta", p.theta);
          w.number("t", p.t);
        } else if constexpr (std::is_same_v<T, Goal>) {
          w.number("x", p.x);
          w.number("y", p.y);
        } else if constexpr (std::is_same_v<T, TrackPoints>) {
          if (p.points.size() % 2 != 0) {
            throw Error(ErrorCode::kInvalidArgument, "encode: odd track coordinate count");
          }
          w.key("points");
          out += '[';
          for (std::size_t i = 0; i < p.points.size(); ++i) {
            if (!std::isfinite(p.points[i])) {
              throw Error(ErrorCode::kNonFinite, "encode: non-finite track point");
            }
            if (i) out += ',';
            out += format_number(p.points[i]);
          }
          out += ']';
        } else if constexpr (std::is_same_v<T, Ack> || std::is_same_v<T, ErrorReport>) {
          w.integer("ref_seq", p.ref_seq);
          if (p.detail) w.string("detail", *p.detail);
        }
      },
      msg.payload);
  w.close();
  out += '\n';
  return out;
}

WireMessage decode(std::string_view frame) {
  if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
  if (!frame.empty() && frame.back() == '\r') frame.remove_suffix(1);
  if (frame.find('\n') != std::string_view::npos) frame_error("embedded newline");

  const json obj = json::parse(frame, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) frame_error("malformed text");
  if (!obj.is_object()) frame_error("frame is not an object");

  const json& kind_v = require(obj, "kind");
  if (!kind_v.is_string()) frame_error("`kind` is not a string");
  const std::string kind = kind_v.get<std::string>();

  WireMessage msg;
  msg.seq = uint_field(obj, "seq");

  if (kind == "hello") {
    msg.payload = Hello{};
  } else if (kind == "cmd") {
    const auto name = optional_string(obj, "cmd");
    if (!name) frame_error("missing key `cmd`");
    MotorCommand c;
    if (*name == "turn") c.kind = CommandKind::kTurn;
    else if (*name == "forward") c.kind = CommandKind::kForward;
    else if (*name == "stop") c.kind = CommandKind::kStop;
    else if (*name == "speed") c.kind = CommandKind::kSpeed;
    else frame_error("unknown cmd `" + *name + "`");
    const auto ur = optional_number(obj, "u_right");
    const auto ul = optional_number(obj, "u_left");
    if (ur.has_value() != ul.has_value()) frame_error("u_right/u_left must come together");
    if (ur) c.speeds = WheelSpeeds{*ur, *ul};
    if (c.kind == CommandKind::kSpeed && !c.speeds) frame_error("speed cmd without speeds");
    if (c.kind == CommandKind::kStop) c.speeds.reset();
    msg.payload = Cmd{c};
  } else if (kind == "pose") {
    msg.payload = PoseReport{number_field(obj, "x"), number_field(obj, "y"),
                             number_field(obj, "theta"), number_field(obj, "t")};
  } else if (kind == "goal") {
    msg.payload = Goal{number_field(obj, "x"), number_field(obj, "y")};
  } else if (kind == "track") {
    const json& pts = require(obj, "points");
    if (!pts.is_array()) frame_error("`points` is not an array");
    if (pts.size() % 2 != 0) frame_error("`points` has an odd length");
    TrackPoints tp;
    tp.points.reserve(pts.size());
    for (const auto& v : pts) {
      if (!v.is_number()) frame_error("`points` holds a non-number");
      tp.points.push_back(v.get<double>());
    }
    msg.payload = std::move(tp);
  } else if (kind == "ack") {
    msg.payload = Ack{uint_field(obj, "ref_seq"), optional_string(obj, "detail")};
  } else if (kind == "error") {
    msg.payload = ErrorReport{uint_field(obj, "ref_seq"), optional_string(obj, "detail")};
  } else {
    throw Error(ErrorCode::kUnsupportedKind, "decode: unsupported kind `" + kind + "`");
  }
  return msg;
}

void SeqGuard::accept(std::uint64_t seq) {
  if (last_ && seq <= *last_) {
    throw Error(ErrorCode::kStaleFrame, "stale frame: seq " + std::to_string(seq) +
                                            " after " + std::to_string(*last_));
  }
  last_ = seq;
}

std::vector<std::string> LineSplitter::feed(std::string_view bytes) {
  std::vector<std::string> lines;
  buffer_.append(bytes);
  std::size_t start = 0;
  for (std::size_t nl = buffer_.find('\n'); nl != std::string::npos;
       nl = buffer_.find('\n', start)) {
    lines.emplace_back(buffer_, start, nl - start);
    start = nl + 1;
  }
  buffer_.erase(0, start);
  return lines;
}

Track track_from_points(const TrackPoints& tp) {
  std::vector<WorldPoint> pts;
  for (std::size_t i = 0; i + 1 < tp.points.size(); i += 2) {
    const WorldPoint p(tp.points[i], tp.points[i + 1]);
    // Drop exact repeats (a sketch may contain them).
    if (!pts.empty() && pts.back().vec() == p.vec()) continue;
    pts.push_back(p);
  }
  return Track(std::move(pts));
}

TrackPoints points_from_track(const Track& track) {
  TrackPoints tp;
  tp.points.reserve(track.size() * 2);
  for (const auto& p : track.points()) {
    tp.points.push_back(p.x());
    tp.points.push_back(p.y());
  }
  return tp;
}

}  // namespace camnav::net
