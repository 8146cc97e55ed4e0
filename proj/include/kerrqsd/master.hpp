#pragma once

// Lindblad master equation for the Kerr oscillator: RK4 time evolution and the
// Liouvillian null-space steady state. Deterministic reference for the
// trajectory ensembles and the analytic moments.

#include <functional>

#include "kerrqsd/model.hpp"

namespace kerrqsd {

/// Hermitian, trace-one, positive semidefinite (to tolerance) density matrix.
class DensityMatrix {
 public:
  /// Validates Hermiticity and trace to `tol` and eigenvalues >= -1e-8;
  /// throws NumericalError otherwise.
  static DensityMatrix from_matrix(CMatrix rho, double tol = 1e-10);
  static DensityMatrix pure(const StateVector& psi);

  const CMatrix& matrix() const noexcept { return m_; }
  FockDim dim() const { return FockDim(m_.rows()); }
  Complex expectation(const Operator& op) const;
  double min_eigenvalue() const;

 private:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

/// -i[H, rho] + L rho L^dag - (1/2){L^dag L, rho}.
CMatrix lindblad_rhs(const CMatrix& rho, const ModelParams& params, FockDim dim);

/// 0.05 / max(kappa, |dw| + chi dim).
double master_dt_bound(const ModelParams& params, FockDim dim);

/// Called at t = 0 and after every `observe_every`-th step.
using MasterObserver = std::function<void(double t, const DensityMatrix& rho)>;

/// Classic RK4; re-Hermitizes and re-normalizes the trace after each step.
/// The step is shrunk so that t_final is a whole number of steps.
DensityMatrix evolve_master(const DensityMatrix& rho0, const ModelParams& params, double t_final,
                            double dt, const MasterObserver& observer = {}, long observe_every = 1);

/// Superoperator acting on column-major vec(rho), size dim^2 x dim^2.
CMatrix liouvillian(const ModelParams& params, FockDim dim);

/// Trace-one null vector of the Liouvillian. Throws TruncationError when the top
/// two Fock populations exceed 1e-10, NumericalError when the solve is singular.
DensityMatrix steady_state_density(const ModelParams& params, FockDim dim);

}  // namespace kerrqsd
