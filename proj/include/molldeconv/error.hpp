#pragma once

#include <stdexcept>
#include <string>

namespace molldeconv {

/// A precondition on a caller-supplied parameter was violated (beta <= 0, empty ROI, grid mismatch, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical contract of the engine itself was breached, e.g. a reconstruction of real data
/// came back with a non-negligible imaginary part. Signals a bug, not bad data.
class NumericalContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stability-budget search failed: the target is outside the search box or kappa was not monotone.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace molldeconv
