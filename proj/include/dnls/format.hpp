#ifndef DNLS_FORMAT_HPP
#define DNLS_FORMAT_HPP

#include <cstdio>
#include <string>

namespace dnls {

/// Shortest round-trip decimal form, locale-independent, identical across
/// runs (CSV and JSON output must be byte-stable).
inline std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace dnls

#endif
