#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace pulsepol {

/// Shortest text that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace pulsepol
