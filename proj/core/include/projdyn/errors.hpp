#ifndef PROJDYN_ERRORS_HPP
#define PROJDYN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace projdyn {

// Non-finite or malformed numeric input.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Out-of-range configuration value (mu <= 0, sigma <= 1, non-p.d. gains, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested force target is incompatible with the constraint geometry.
class InvalidTarget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The actuation map cannot realize every admissible generalized force.
class RankDeficiency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Position-level retraction failed to converge.
class InconsistentState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace projdyn

#endif  // PROJDYN_ERRORS_HPP
