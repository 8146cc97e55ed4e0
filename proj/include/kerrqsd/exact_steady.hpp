#pragma once

// Exact steady-state moments of the quantum Kerr oscillator in terms of the
// generalized hypergeometric series 0F2. All Gamma-function ratios are reduced to
// Pochhammer reciprocals, Gamma(c)/Gamma(c+m) = 1/(c)_m, so no Gamma is evaluated.

#include "kerrqsd/model.hpp"

namespace kerrqsd {

struct HyperParams {
  Complex c;  // (dw + chi)/chi - i kappa/(2 chi)
  double z;   // 2 (beta/chi)^2
};

HyperParams hyper_params(const ModelParams& params);

/// Value * 2^exponent, for series whose magnitude leaves the double range.
struct ScaledComplex {
  Complex mantissa;
  long exponent = 0;
  Complex value() const;
};

/// sum_n z^n / (n! (c)_n (d)_n), with compensated accumulation and rescaling.
/// Throws std::domain_error at a Pochhammer pole and std::runtime_error if the
/// series has not converged after 10^6 terms.
ScaledComplex hyper0f2_scaled(Complex c, Complex d, Complex z);
Complex hyper0f2(Complex c, Complex d, Complex z);

/// <a^dag^n a^m> in the steady state; n, m <= 32, chi > 0.
Complex steady_moment(int n, int m, const ModelParams& params);

/// <a^dag a> in the steady state.
double mean_excitation(const ModelParams& params);

}  // namespace kerrqsd
