#pragma once

// Driven damped Kerr oscillator in the frame rotating at the drive frequency:
//   H = dw a^dag a + beta (a^dag + a) + chi (a^dag a)^2,   L = sqrt(kappa) a.

#include "kerrqsd/hilbert.hpp"

namespace kerrqsd {

struct ModelParams {
  double detuning = 0.0;  // dw = w0 - w
  double drive = 0.0;     // beta, real
  double chi = 0.0;       // anharmonicity, >= 0
  double kappa = 1.0;     // damping rate, > 0

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

Operator hamiltonian(const ModelParams& params, FockDim dim);
Operator lindblad(const ModelParams& params, FockDim dim);

}  // namespace kerrqsd
