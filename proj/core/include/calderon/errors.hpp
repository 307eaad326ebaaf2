#pragma once

#include <stdexcept>
#include <string>

namespace calderon {

/// Raised when an input violates a documented precondition (dimension
/// mismatches, non-positive conductivities, malformed configs, ...).
class invalid_input_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation breaks down numerically (singular system,
/// non-finite intermediate, iteration that fails to converge).
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised on file-system failures; carries the offending path in the message.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Process exit codes used by the command-line tool.
enum exit_code : int {
  exit_ok = 0,
  exit_usage = 2,
  exit_numerical = 3,
  exit_io = 4,
};

} // namespace calderon
