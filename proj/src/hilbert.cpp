#include "kerrqsd/hilbert.hpp"

#include "kerrqsd/errors.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <utility>
#include <stdexcept>
#include <string>

namespace kerrqsd {

namespace {

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::clog << "warning: " << msg << '\n';
  };
  return handler;
}

void check_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) { return std::exchange(warning_handler(), std::move(handler)); }

void warn(std::string_view message) {
  if (warning_handler()) warning_handler()(message);
}

FockDim::FockDim(Index dim) : dim_(dim) {
  if (dim < 2) throw std::invalid_argument("FockDim: dim must be >= 2, got " + std::to_string(dim));
}

StateVector StateVector::from_amplitudes(CVector amplitudes) {
  if (amplitudes.size() < 2) throw std::invalid_argument("StateVector: need at least 2 amplitudes");
  const double norm = amplitudes.norm();
  if (!std::isfinite(norm) || norm == 0.0) {
    throw std::invalid_argument("StateVector: amplitudes have zero or non-finite norm");
  }
  amplitudes /= norm;
  return StateVector(std::move(amplitudes));
}

StateVector StateVector::fock(Index n, FockDim dim) {
  if (n < 0 || n >= dim.value()) throw std::out_of_range("StateVector::fock: level outside basis");
  CVector v = CVector::Zero(dim.value());
  v[n] = 1.0;
  return StateVector(std::move(v));
}

Operator::Operator(CMatrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("Operator: matrix must be square");
  (void)FockDim(m_.rows());
}

bool Operator::is_hermitian(double tol) const {
  for (Index j = 0; j < m_.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      if (std::abs(m_(i, j) - std::conj(m_(j, i))) > tol) return false;
    }
  }
  return true;
}

Operator operator*(const Operator& x, const Operator& y) {
  check_same_dim(x.m_.rows(), y.m_.rows(), "Operator product");
  return Operator(x.m_ * y.m_);
}

Operator operator+(const Operator& x, const Operator& y) {
  check_same_dim(x.m_.rows(), y.m_.rows(), "Operator sum");
  return Operator(x.m_ + y.m_);
}

Operator operator*(Complex s, const Operator& x) { return Operator(s * x.m_); }

Operator annihilation(FockDim dim) {
  const Index d = dim.value();
  CMatrix a = CMatrix::Zero(d, d);
  for (Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(std::move(a));
}

Operator creation(FockDim dim) { return annihilation(dim).adjoint(); }

Operator number(FockDim dim) {
  const Index d = dim.value();
  CMatrix n = CMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return Operator(std::move(n));
}

Operator identity(FockDim dim) { return Operator(CMatrix::Identity(dim.value(), dim.value())); }

Complex expectation(const Operator& op, const StateVector& psi) {
  check_same_dim(op.matrix().rows(), psi.amplitudes().size(), "expectation");
  return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

CoherentState coherent_state(Complex alpha, FockDim dim) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw std::invalid_argument("coherent_state: non-finite amplitude");
  }
  const Index d = dim.value();
  CVector c(d);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (Index n = 1; n < d; ++n) c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  const double deficit = std::max(0.0, 1.0 - c.squaredNorm());
  if (deficit > 1e-8) {
    std::ostringstream os;
    os << "coherent_state: truncation deficit " << deficit << " at dim " << d << " for |alpha| "
       << std::abs(alpha) << " (recommended dim " << recommended_dim(alpha) << ")";
    warn(os.str());
  }
  return {StateVector::from_amplitudes(std::move(c)), deficit};
}

Index recommended_dim(Complex alpha) {
  const double r = std::abs(alpha);
  return std::max<Index>(2, static_cast<Index>(std::ceil(r * r + 6.0 * r + 10.0)));
}

CMatrix expm(const CMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const CMatrix scaled = a / std::ldexp(1.0, squarings);

  CMatrix result = CMatrix::Identity(a.rows(), a.cols());
  CMatrix term = result;
  // ||scaled|| <= 1/2, so the tail after term k is below ||term_k||
  for (int k = 1; k < 60; ++k) {
    term = term * scaled / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Operator displacement_operator(Complex alpha, FockDim dim) {
  const CMatrix a = annihilation(dim).matrix();
  const CMatrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
  return Operator(expm(generator));
}

StateVector apply_displacement(Complex alpha, const StateVector& psi) {
  if (alpha == Complex{}) return psi;
  const Operator d = displacement_operator(alpha, psi.dim());
  return StateVector::from_amplitudes(d.matrix() * psi.amplitudes());
}

Quadratures quadratures(const StateVector& psi) {
  const CVector& c = psi.amplitudes();
  const Index d = c.size();
  Complex a{}, a2{};
  double ada = 0.0;
  for (Index n = 1; n < d; ++n) {
    a += std::conj(c[n - 1]) * c[n] * std::sqrt(static_cast<double>(n));
    ada += static_cast<double>(n) * std::norm(c[n]);
  }
  for (Index n = 2; n < d; ++n) {
    a2 += std::conj(c[n - 2]) * c[n] * std::sqrt(static_cast<double>(n * (n - 1)));
  }
  const Complex da2 = a2 - a * a;
  const double dada = ada - std::norm(a);
  Quadratures out{};
  out.q = std::sqrt(2.0) * a.real();
  out.p = std::sqrt(2.0) * a.imag();
  out.var_q = std::max(0.0, dada + da2.real() + 0.5);
  out.var_p = std::max(0.0, dada - da2.real() + 0.5);
  return out;
}

BandOperator::BandOperator(Index dim) : dim_(FockDim(dim).value()) {
  for (auto& d : diags_) d = CVector::Zero(dim_);
}

Complex& BandOperator::at(Index row, Index col) {
  const Index k = col - row;
  if (k < -2 || k > 2 || row < 0 || col < 0 || row >= dim_ || col >= dim_) {
    throw std::out_of_range("BandOperator::at: outside band");
  }
  return diags_[static_cast<std::size_t>(k + 2)][row];
}

Complex BandOperator::at(Index row, Index col) const {
  const Index k = col - row;
  if (k < -2 || k > 2 || row < 0 || col < 0 || row >= dim_ || col >= dim_) return {};
  return diags_[static_cast<std::size_t>(k + 2)][row];
}

void BandOperator::apply(std::span<const Complex> in, std::span<Complex> out) const {
  const Index d = std::min(dim_, static_cast<Index>(std::min(in.size(), out.size())));
  const Complex* m2 = diags_[0].data();
  const Complex* m1 = diags_[1].data();
  const Complex* d0 = diags_[2].data();
  const Complex* p1 = diags_[3].data();
  const Complex* p2 = diags_[4].data();
  const Complex* x = in.data();
  Complex* y = out.data();
  if (d < 5) {
    for (Index i = 0; i < d; ++i) {
      Complex s = d0[i] * x[i];
      if (i >= 2) s += m2[i] * x[i - 2];
      if (i >= 1) s += m1[i] * x[i - 1];
      if (i + 1 < d) s += p1[i] * x[i + 1];
      if (i + 2 < d) s += p2[i] * x[i + 2];
      y[i] = s;
    }
    return;
  }
  y[0] = d0[0] * x[0] + p1[0] * x[1] + p2[0] * x[2];
  y[1] = m1[1] * x[0] + d0[1] * x[1] + p1[1] * x[2] + p2[1] * x[3];
  for (Index i = 2; i < d - 2; ++i) {
    y[i] = m2[i] * x[i - 2] + m1[i] * x[i - 1] + d0[i] * x[i] + p1[i] * x[i + 1] + p2[i] * x[i + 2];
  }
  y[d - 2] = m2[d - 2] * x[d - 4] + m1[d - 2] * x[d - 3] + d0[d - 2] * x[d - 2] + p1[d - 2] * x[d - 1];
  y[d - 1] = m2[d - 1] * x[d - 3] + m1[d - 1] * x[d - 2] + d0[d - 1] * x[d - 1];
}

CMatrix BandOperator::to_dense() const {
  CMatrix m = CMatrix::Zero(dim_, dim_);
  for (Index i = 0; i < dim_; ++i) {
    for (Index k = -2; k <= 2; ++k) {
      const Index j = i + k;
      if (j >= 0 && j < dim_) m(i, j) = diags_[static_cast<std::size_t>(k + 2)][i];
    }
  }
  return m;
}

double BandOperator::norm1() const {
  double best = 0.0;
  for (Index j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (Index k = -2; k <= 2; ++k) s += std::abs(at(j - k, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace kerrqsd

namespace kerrqsd {

namespace {

// Leading block that carries amplitude: everything up to the last level above
// 1e-14 of the norm, plus `reach` levels of headroom for the band to spread into.
Index active_size(const CVector& v, Index reach) {
  const double floor = 1e-14 * v.norm();
  Index last = 0;
  for (Index i = v.size() - 1; i >= 0; --i) {
    if (std::abs(v[i]) > floor) {
      last = i;
      break;
    }
  }
  return std::min<Index>(v.size(), last + 1 + reach);
}

}  // namespace

CVector expm_action(const BandOperator& a, const CVector& v, Complex t) {
  const Index d = a.dim();
  if (v.size() != d) throw std::invalid_argument("expm_action: dimension mismatch");
  if (t == Complex{}) return v;

  constexpr Index reach = 40;
  const Index m0 = active_size(v, reach);

  // shift by the population-weighted diagonal to shrink the series
  const CVector& diag = a.diagonal(0);
  const double weight = v.head(m0).squaredNorm();
  Complex mu{};
  if (weight > 0.0) {
    for (Index i = 0; i < m0; ++i) mu += std::norm(v[i]) * diag[i];
    mu /= weight;
  }
  double bound = 0.0;
  for (Index j = 0; j < m0; ++j) {
    double s = std::abs(diag[j] - mu);
    for (int k = -2; k <= 2; ++k) {
      if (k != 0 && j - k >= 0 && j - k < m0) s += std::abs(a.at(j - k, j));
    }
    bound = std::max(bound, s);
  }
  const auto substeps = std::max<long>(1, static_cast<long>(std::ceil(0.5 * bound * std::abs(t))));
  const Complex h = t / static_cast<double>(substeps);

  CVector acc = v;
  CVector term(d), next(d);
  for (long s = 0; s < substeps; ++s) {
    const Index m = s == 0 ? m0 : active_size(acc, reach);
    const auto span_in = std::span<const Complex>(term.data(), static_cast<std::size_t>(m));
    const auto span_out = std::span<Complex>(next.data(), static_cast<std::size_t>(m));
    term.head(m) = acc.head(m);
    bool converged = false;
    for (int k = 1; k <= 100; ++k) {
      a.apply(span_in, span_out);
      next.head(m) -= mu * term.head(m);
      term.head(m) = next.head(m) * (h / static_cast<double>(k));
      acc.head(m) += term.head(m);
      if (term.head(m).squaredNorm() <= 1e-34 * acc.head(m).squaredNorm()) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("expm_action: Taylor series did not converge");
  }
  return acc * std::exp(mu * t);
}

CVector displace_vector(Complex alpha, const CVector& v) {
  const Index d = v.size();
  BandOperator gen(d);
  for (Index n = 1; n < d; ++n) {
    const double s = std::sqrt(static_cast<double>(n));
    gen.at(n, n - 1) = alpha * s;             // alpha a^dag
    gen.at(n - 1, n) = -std::conj(alpha) * s;  // -alpha^* a
  }
  return expm_action(gen, v, 1.0);
}

}  // namespace kerrqsd
