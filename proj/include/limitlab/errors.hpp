#pragma once

#include <stdexcept>
#include <string>

namespace limitlab {

// Raised when an operator or target is evaluated at a point where the
// defining integral (or sum) is singular, e.g. on an atom of the measure.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised by the experiment-config parser; carries the 1-based source line
// (0 when the problem is not tied to a single line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace limitlab
