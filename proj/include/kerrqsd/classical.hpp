#pragma once

// Mean-field (factorized) limit of the Kerr oscillator:
//   d alpha/dt = -i{beta + (dw + chi) alpha + 2 chi |alpha|^2 alpha} - (kappa/2) alpha.

#include <array>
#include <optional>
#include <vector>

#include "kerrqsd/model.hpp"

namespace kerrqsd {

struct SteadyBranch {
  Complex alpha;
  double excitation = 0.0;  // |alpha|^2
  bool stable = false;
  std::array<Complex, 2> jacobian_eigen{};
  /// Set on both members of a numerically coincident root pair.
  bool degenerate = false;
};

Complex mean_field_rhs(Complex alpha, const ModelParams& params);

/// Steady-state branches sorted by excitation. One to three entries; a double
/// root at the edge of the bistable domain shows up as two degenerate entries.
std::vector<SteadyBranch> steady_states(const ModelParams& params);

/// Residual of the excitation cubic n[(kappa/2)^2 + (dw + chi + 2 chi n)^2] - beta^2.
double steady_cubic(double n, const ModelParams& params);

/// Slack of each bistability inequality; all three positive <=> bistable.
struct BistabilityMargins {
  double orientation;  // -chi (dw + chi)
  double detuning;     // |(dw + chi)/(kappa/2)| - sqrt(3)
  double drive;        // rhs - lhs of the cubic-discriminant inequality
};

BistabilityMargins bistability_margins(const ModelParams& params);

/// Classical three-root test. Requires chi > 0.
bool bistable(const ModelParams& params);

struct ReducedCoords {
  double x;  // (kappa/2)/(dw + chi)
  double y;  // (kappa/2)^3/(beta^2 chi)
};

ReducedCoords reduced_coords(const ModelParams& params);
bool bistable(ReducedCoords xy);

/// y-interval of the bistable domain at fixed x; empty for x outside (-1/sqrt(3), 0).
struct DomainSlice {
  double y_lower;
  double y_upper;
};
std::optional<DomainSlice> domain_slice(double x);

/// Detuning interval (at fixed drive, chi, kappa) where the classical system is bistable,
/// searched inside [lo, hi]. Edges are refined by bisection to `tol`.
struct DetuningWindow {
  double lower;
  double upper;
  double width() const { return upper - lower; }
};
std::optional<DetuningWindow> bistable_window(const ModelParams& base, double lo, double hi,
                                              double tol = 1e-10);

/// Classical RK4 integration of the mean-field equation.
Complex integrate_mean_field(Complex alpha, const ModelParams& params, double duration, double dt);

}  // namespace kerrqsd
