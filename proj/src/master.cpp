#include "kerrqsd/master.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "kerrqsd/errors.hpp"

namespace kerrqsd {

namespace {

struct MasterOperators {
  CMatrix h;
  CMatrix l;
  CMatrix l_dag;
  CMatrix ldl;

  MasterOperators(const ModelParams& params, FockDim dim)
      : h(hamiltonian(params, dim).matrix()),
        l(lindblad(params, dim).matrix()),
        l_dag(l.adjoint()),
        ldl(l_dag * l) {}

  CMatrix rhs(const CMatrix& rho) const {
    const CMatrix h_rho = h * rho;
    const CMatrix ldl_rho = ldl * rho;
    return -kI * (h_rho - h_rho.adjoint()) + l * rho * l_dag - 0.5 * (ldl_rho + ldl_rho.adjoint());
  }
};

}  // namespace

DensityMatrix DensityMatrix::from_matrix(CMatrix rho, double tol) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("DensityMatrix: matrix must be square");
  (void)FockDim(rho.rows());
  if (!rho.allFinite()) throw NumericalError("DensityMatrix: non-finite entries");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  const Complex tr = rho.trace();
  std::ostringstream os;
  if (herm > tol) {
    os << "DensityMatrix: not Hermitian (deviation " << herm << ")";
    throw NumericalError(os.str());
  }
  if (std::abs(tr - 1.0) > tol) {
    os << "DensityMatrix: trace " << tr << " differs from 1";
    throw NumericalError(os.str());
  }
  DensityMatrix out(std::move(rho));
  const double min_ev = out.min_eigenvalue();
  if (min_ev < -1e-8) {
    os << "DensityMatrix: negative eigenvalue " << min_ev;
    throw NumericalError(os.str());
  }
  return out;
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const CVector& v = psi.amplitudes();
  return DensityMatrix(v * v.adjoint());
}

Complex DensityMatrix::expectation(const Operator& op) const {
  if (op.matrix().rows() != m_.rows()) throw std::invalid_argument("expectation: dimension mismatch");
  return (m_ * op.matrix()).trace();
}

double DensityMatrix::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CMatrix lindblad_rhs(const CMatrix& rho, const ModelParams& params, FockDim dim) {
  if (rho.rows() != dim.value() || rho.cols() != dim.value()) {
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  }
  return MasterOperators(params, dim).rhs(rho);
}

double master_dt_bound(const ModelParams& params, FockDim dim) {
  return 0.05 / std::max(params.kappa,
                         std::abs(params.detuning) + params.chi * static_cast<double>(dim.value()));
}

DensityMatrix evolve_master(const DensityMatrix& rho0, const ModelParams& params, double t_final,
                            double dt, const MasterObserver& observer, long observe_every) {
  const FockDim dim = rho0.dim();
  if (!(dt > 0.0) || !(t_final >= 0.0)) throw std::invalid_argument("evolve_master: need dt > 0, t_final >= 0");
  if (dt > master_dt_bound(params, dim) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "evolve_master: dt " << dt << " exceeds the bound " << master_dt_bound(params, dim);
    throw std::invalid_argument(os.str());
  }
  if (observe_every < 1) throw std::invalid_argument("evolve_master: observe_every must be >= 1");

  const MasterOperators ops(params, dim);
  const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  const double h = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
  CMatrix rho = rho0.matrix();
  if (observer) observer(0.0, rho0);

  for (long s = 1; s <= steps; ++s) {
    const CMatrix k1 = ops.rhs(rho);
    const CMatrix k2 = ops.rhs(rho + 0.5 * h * k1);
    const CMatrix k3 = ops.rhs(rho + 0.5 * h * k2);
    const CMatrix k4 = ops.rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const Complex tr = rho.trace();
    if (!rho.allFinite() || std::abs(tr - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "evolve_master: trace drifted to " << tr << " at t = " << s * h
         << " (dt too large or basis too small)";
      throw NumericalError(os.str());
    }
    rho /= tr.real();
    if (observer && s % observe_every == 0) observer(static_cast<double>(s) * h, DensityMatrix::from_matrix(rho));
  }
  return DensityMatrix::from_matrix(std::move(rho));
}

CMatrix liouvillian(const ModelParams& params, FockDim dim) {
  const MasterOperators ops(params, dim);
  const Index d = dim.value();
  const Index n = d * d;
  CMatrix sup = CMatrix::Zero(n, n);
  // vec(A rho B) = (B^T kron A) vec(rho), column-major
  auto idx = [d](Index i, Index j) { return i + j * d; };
  const CMatrix a_left = -kI * ops.h - 0.5 * ops.ldl;  // acts from the left
  const CMatrix a_right = kI * ops.h - 0.5 * ops.ldl;  // acts from the right
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      const Index col = idx(i, j);
      // left action: (A rho)_{kj} += A_{ki} rho_{ij}
      for (Index k = 0; k < d; ++k) sup(idx(k, j), col) += a_left(k, i);
      // right action: (rho B)_{ik} += rho_{ij} B_{jk}
      for (Index k = 0; k < d; ++k) sup(idx(i, k), col) += a_right(j, k);
      // jump: (L rho L^dag)_{kl} += L_{ki} rho_{ij} conj(L_{lj})
      for (Index l = 0; l < d; ++l) {
        const Complex right = std::conj(ops.l(l, j));
        if (right == Complex{}) continue;
        for (Index k = 0; k < d; ++k) sup(idx(k, l), col) += ops.l(k, i) * right;
      }
    }
  }
  return sup;
}

DensityMatrix steady_state_density(const ModelParams& params, FockDim dim) {
  const Index d = dim.value();
  CMatrix sup = liouvillian(params, dim);
  CVector rhs = CVector::Zero(d * d);
  sup.row(0).setZero();
  for (Index k = 0; k < d; ++k) sup(0, k + k * d) = 1.0;
  rhs[0] = 1.0;

  Eigen::PartialPivLU<CMatrix> lu(sup);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "steady_state_density: near-singular Liouvillian system (rcond " << rcond << ")";
    throw NumericalError(os.str());
  }
  const CVector vec = lu.solve(rhs);
  CMatrix rho = Eigen::Map<const CMatrix>(vec.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();

  const double top = rho(d - 1, d - 1).real() + rho(d - 2, d - 2).real();
  if (top > 1e-10) {
    std::ostringstream os;
    os << "steady_state_density: top two Fock populations sum to " << top << " at dim " << d
       << "; raise dim";
    throw TruncationError(os.str());
  }
  return DensityMatrix::from_matrix(std::move(rho));
}

}  // namespace kerrqsd
