#pragma once

#include <charconv>
#include <string>

namespace hyltl {

// Shortest decimal form that parses back to the same double. Used everywhere
// a number reaches a file or report so that output is bit-reproducible.
inline std::string shortest_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace hyltl
