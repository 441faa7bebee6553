#pragma once

#include <string>

namespace camnav {

/// Fixed numeric text form shared by the wire protocol and CSV output:
/// printf "%.6g" (6 significant digits), with negative zero printed as "0".
std::string format_number(double value);

}  // namespace camnav
