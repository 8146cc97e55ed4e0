#pragma once

// Truncated Fock-space linear algebra shared by every other module.
//
// Conventions: hbar = 1 and a = (Q + iP)/sqrt(2), so a coherent state |alpha>
// is centred at Q = sqrt(2) Re(alpha), P = sqrt(2) Im(alpha) with
// var(Q) = var(P) = 1/2.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace kerrqsd {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

/// Receives non-fatal diagnostics (truncation deficits, short delays).
/// The default handler writes to std::clog.
using WarningHandler = std::function<void(std::string_view)>;
/// Returns the handler it replaces.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

/// Number of retained Fock levels; indices run over 0..dim-1.
class FockDim {
 public:
  explicit FockDim(Index dim);
  Index value() const noexcept { return dim_; }
  friend bool operator==(FockDim, FockDim) = default;

 private:
  Index dim_;
};

/// Unit-norm amplitude vector over a truncated Fock basis.
class StateVector {
 public:
  /// Normalizes `amplitudes`; throws on zero or non-finite norm.
  static StateVector from_amplitudes(CVector amplitudes);
  static StateVector fock(Index n, FockDim dim);

  const CVector& amplitudes() const noexcept { return amps_; }
  FockDim dim() const { return FockDim(amps_.size()); }
  Complex operator[](Index n) const { return amps_[n]; }

 private:
  explicit StateVector(CVector normalized) : amps_(std::move(normalized)) {}
  CVector amps_;
};

/// Square dense operator on a truncated Fock basis.
class Operator {
 public:
  explicit Operator(CMatrix entries);

  const CMatrix& matrix() const noexcept { return m_; }
  FockDim dim() const { return FockDim(m_.rows()); }
  Operator adjoint() const { return Operator(m_.adjoint()); }
  bool is_hermitian(double tol = 0.0) const;

  friend Operator operator*(const Operator& x, const Operator& y);
  friend Operator operator+(const Operator& x, const Operator& y);
  friend Operator operator*(Complex s, const Operator& x);

 private:
  CMatrix m_;
};

Operator annihilation(FockDim dim);
Operator creation(FockDim dim);
Operator number(FockDim dim);
Operator identity(FockDim dim);

/// <psi|op|psi>.
Complex expectation(const Operator& op, const StateVector& psi);

struct CoherentState {
  StateVector state;
  /// 1 - sum |c_n|^2 before renormalization.
  double truncation_deficit;
};

/// Truncated coherent state; warns (never throws) when the deficit exceeds 1e-8.
CoherentState coherent_state(Complex alpha, FockDim dim);

/// Smallest dim with |alpha|^2 + 6|alpha| + 10 <= dim.
Index recommended_dim(Complex alpha);

/// exp(alpha a^dag - alpha^* a) in the truncated basis.
Operator displacement_operator(Complex alpha, FockDim dim);

/// D(alpha) psi via the dense matrix exponential, renormalized.
StateVector apply_displacement(Complex alpha, const StateVector& psi);

/// Scaling-and-squaring Taylor exponential, truncation tolerance 1e-12 or better.
CMatrix expm(const CMatrix& a);

struct Quadratures {
  double q;
  double p;
  double var_q;
  double var_p;
};

/// Position/momentum means and variances.
/// Variances use the continuum commutator [a, a^dag] = 1, which agrees with the
/// truncated operators whenever the top level is unpopulated.
Quadratures quadratures(const StateVector& psi);

/// Banded operator with half-bandwidth 2, stored by diagonals.
/// Only entries (i, j) with |i - j| <= 2 are stored.
class BandOperator {
 public:
  explicit BandOperator(Index dim);

  Index dim() const noexcept { return dim_; }
  Complex& at(Index row, Index col);
  Complex at(Index row, Index col) const;

  /// out = A * in. `in` and `out` must not alias.
  void apply(std::span<const Complex> in, std::span<Complex> out) const;
  CMatrix to_dense() const;
  /// Max absolute column sum.
  double norm1() const;

  /// Raw diagonal at offset k in -2..2; entry i is (i, i + k).
  CVector& diagonal(int k) { return diags_.at(static_cast<std::size_t>(k + 2)); }
  const CVector& diagonal(int k) const { return diags_.at(static_cast<std::size_t>(k + 2)); }

 private:
  Index dim_;
  // five diagonals of length dim; entries outside the matrix stay zero
  std::array<CVector, 5> diags_;
};

/// exp(t A) v by a shifted, sub-stepped Taylor series on the vector (no dense matrix).
/// Accurate to rounding; throws NumericalError if a sub-step fails to converge.
CVector expm_action(const BandOperator& a, const CVector& v, Complex t);

/// D(alpha) v via expm_action on the truncated generator alpha a^dag - alpha^* a.
CVector displace_vector(Complex alpha, const CVector& v);

}  // namespace kerrqsd
