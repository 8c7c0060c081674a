#ifndef SHILLSIM_FORMAT_HPP
#define SHILLSIM_FORMAT_HPP

#include <charconv>
#include <string>

namespace shillsim {

// Shortest decimal form that round-trips the exact double; keeps every
// emitted document byte-stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace shillsim

#endif
