#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace topseg {

// Thrown for contract violations (bad shapes, bad config, malformed input).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when training arithmetic produces a non-finite value. The grid
// runner downgrades this to a "failed" row instead of aborting the run.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

template <class... Parts>
std::string cat(Parts&&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

template <class... Parts>
void require(bool cond, Parts&&... parts) {
  if (!cond) throw Error(cat(std::forward<Parts>(parts)...));
}

inline std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace topseg
