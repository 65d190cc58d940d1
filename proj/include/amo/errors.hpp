#pragma once

#include <stdexcept>
#include <string>

namespace amo {

/// Malformed input: bad spec strings, violated preconditions, unknown keys.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A construction or solve that cannot proceed at the given parameters:
/// singular box, s = 0 interval construction, coincident phases.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside the localization regime lambda > e^{7 beta}.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace amo
