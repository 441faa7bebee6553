#include "camnav/format.hpp"

#include <cstdio>

namespace camnav {

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.6g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace camnav
