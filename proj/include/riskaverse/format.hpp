#pragma once

#include <cstdio>
#include <string>

namespace riskaverse {

/// Locale-independent 12-significant-digit rendering used by every emitter.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace riskaverse
