#include "camnav/calibration.hpp"

#include <istream>
#include <sstream>
#include <string>

namespace camnav {

CalibrationSet read_calibration_pairs(std::istream& in) {
  CalibrationSet pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double x, y, u, v;
    if (!(fields >> x)) continue;  // blank or comment-only
    if (!(fields >> y >> u >> v)) {
      throw Error(ErrorCode::kIo,
                  "calibration pairs: expected `X Y u v` on line " + std::to_string(lineno));
    }
    std::string extra;
    if (fields >> extra) {
      throw Error(ErrorCode::kIo,
                  "calibration pairs: trailing data on line " + std::to_string(lineno));
    }
    pairs.push_back({WorldPoint(x, y), PixelPoint(u, v)});
  }
  return pairs;
}

}  // namespace camnav
