#include <doctest.h>

#include <cmath>
#include <random>

#include "kerrqsd/exact_steady.hpp"
#include "kerrqsd/master.hpp"

using namespace kerrqsd;

namespace {

const ModelParams kLow{-1.0, 0.5, 0.5, 1.0};

CMatrix random_density(Index dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CMatrix x(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) x(i, j) = Complex(g(rng), g(rng));
  CMatrix rho = x * x.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_SUITE("master") {
  TEST_CASE("vacuum is stationary without drive") {
    const FockDim dim(6);
    const CMatrix vac = DensityMatrix::pure(StateVector::fock(0, dim)).matrix();
    CHECK(lindblad_rhs(vac, {-2.0, 0.0, 0.3, 1.0}, dim).norm() == 0.0);
  }

  TEST_CASE("right-hand side is traceless and Hermitian") {
    const FockDim dim(8);
    const CMatrix rho = random_density(8, 1);
    const CMatrix d = lindblad_rhs(rho, kLow, dim);
    CHECK(std::abs(d.trace()) < 1e-12);
    CHECK((d - d.adjoint()).norm() < 1e-12);
  }

  TEST_CASE("Liouvillian matches the right-hand side") {
    const FockDim dim(5);
    const CMatrix rho = random_density(5, 2);
    const CMatrix l = liouvillian(kLow, dim);
    const Eigen::Map<const CVector> vec(rho.data(), rho.size());
    const CVector out = l * vec;
    const CMatrix d = lindblad_rhs(rho, kLow, dim);
    CHECK((Eigen::Map<const CMatrix>(out.data(), 5, 5) - d).norm() < 1e-12);
  }

  TEST_CASE("density matrix validation") {
    CMatrix bad = CMatrix::Identity(3, 3);
    CHECK_THROWS(DensityMatrix::from_matrix(bad));
    bad /= 3.0;
    bad(0, 1) = 0.2;
    CHECK_THROWS(DensityMatrix::from_matrix(bad));
    CHECK_NOTHROW(DensityMatrix::from_matrix(random_density(4, 3)));
  }

  TEST_CASE("coherent decay without nonlinearity") {
    const ModelParams p{1.3, 0.0, 0.0, 1.0};
    const FockDim dim(30);
    const Complex a0(1.5, -0.7);
    const Operator a = annihilation(dim);
    double worst = 0.0;
    evolve_master(
        DensityMatrix::pure(coherent_state(a0, dim).state), p, 4.0, 0.002,
        [&](double t, const DensityMatrix& rho) {
          worst = std::max(worst, std::abs(rho.expectation(a) - a0 * std::exp(Complex(-0.5, -1.3) * t)));
        },
        50);
    CHECK(worst < 1e-6);
  }

  TEST_CASE("fourth-order self-convergence") {
    const FockDim dim(12);
    const DensityMatrix rho0 = DensityMatrix::pure(StateVector::fock(2, dim));
    const Operator n = number(dim);
    const double coarse = evolve_master(rho0, kLow, 2.0, 0.004).expectation(n).real();
    const double fine = evolve_master(rho0, kLow, 2.0, 0.002).expectation(n).real();
    CHECK(std::abs(coarse - fine) < 1e-8);
  }

  TEST_CASE("steady state") {
    const FockDim dim(20);
    const DensityMatrix vac = steady_state_density({-1.0, 0.0, 0.5, 1.0}, dim);
    CHECK(std::abs(vac.matrix()(0, 0) - 1.0) < 1e-12);

    const DensityMatrix rho = steady_state_density(kLow, dim);
    CHECK(lindblad_rhs(rho.matrix(), kLow, dim).norm() < 1e-10);
    CHECK(std::abs(rho.expectation(number(dim)).real() - mean_excitation(kLow)) < 1e-8 * mean_excitation(kLow));
    CHECK(rho.min_eigenvalue() > -1e-8);
  }

  TEST_CASE("long-time evolution reaches the steady state") {
    // The slowest Liouvillian mode here decays at 0.5046, so the distance at
    // 20/kappa is still a few 1e-5; it is below 1e-6 by 40/kappa.
    const FockDim dim(14);
    const DensityMatrix ss = steady_state_density(kLow, dim);
    const DensityMatrix mid = evolve_master(DensityMatrix::pure(StateVector::fock(0, dim)), kLow, 20.0, 0.004);
    const DensityMatrix late = evolve_master(mid, kLow, 20.0, 0.004);
    CHECK((mid.matrix() - ss.matrix()).norm() < 1e-4);
    CHECK((late.matrix() - ss.matrix()).norm() < 1e-6);
    CHECK(late.min_eigenvalue() > -1e-8);
  }

  TEST_CASE("truncation is reported") {
    CHECK_THROWS_AS(steady_state_density({-5.0, -7.0, 0.05, 1.5}, FockDim(10)), std::runtime_error);
  }
}
