#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace pcn {

// Shortest round-trip representation, identical on every run.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace pcn
