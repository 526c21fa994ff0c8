#pragma once

#include <stdexcept>

namespace qdat {

/// Rejected input: a precondition on an operation or a scenario field failed.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical invariant was violated badly enough to indicate an
/// inconsistent kernel/grid combination rather than rounding noise.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure while emitting a report or sidecar.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qdat
