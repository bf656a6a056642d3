#pragma once

#include <stdexcept>
#include <string>

namespace mpiv {

/// Thrown when a computation becomes numerically invalid (degenerate plane,
/// nonfinite loss, ...) as opposed to malformed input.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace detail
}  // namespace mpiv
