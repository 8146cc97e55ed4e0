#pragma once

#include <stdexcept>

namespace kerrqsd {

/// The basis is too small for the state it has to hold.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integrator or solver left its validity region (step too large, singular system).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kerrqsd
