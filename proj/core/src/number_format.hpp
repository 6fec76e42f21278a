#pragma once

#include <cstdio>
#include <string>

namespace qeo::detail {

/// Scientific notation with 17 significant digits, enough to round-trip a double.
inline std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace qeo::detail
