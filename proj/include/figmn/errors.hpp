#pragma once

#include <stdexcept>
#include <string>

namespace figmn {

// A rank-one update whose Sherman-Morrison denominator is too close to zero
// to invert. Carries the offending denominator value.
class SingularUpdate : public std::runtime_error {
 public:
  explicit SingularUpdate(double guard)
      : std::runtime_error("singular rank-one update, denominator g = " +
                           std::to_string(guard)),
        guard_(guard) {}

  double guard() const noexcept { return guard_; }

 private:
  double guard_;
};

// A component whose covariance/precision state can no longer support the
// requested operation (non-positive determinant, failed solve, ...).
class DegenerateComponent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid learner/run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (CSV, model file). Messages name the offending cell.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace figmn
