#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "kerrqsd/exact_steady.hpp"
#include "kerrqsd/master.hpp"

using namespace kerrqsd;

namespace {
const ModelParams kLow{-1.0, 0.5, 0.5, 1.0};
}

TEST_SUITE("exact_steady") {
  TEST_CASE("hypergeometric series") {
    CHECK(std::abs(hyper0f2(Complex(1.3, -0.2), Complex(0.4, 2.0), 0.0) - 1.0) < 1e-16);

    // sum 1/(n!)^3, summed directly
    double direct = 0.0, term = 1.0;
    for (int n = 0; n < 30; ++n) {
      direct += term;
      term /= double(n + 1) * (n + 1) * (n + 1);
    }
    const Complex f = hyper0f2(1.0, 1.0, 1.0);
    CHECK(std::abs(f - direct) < 1e-15);
    // extended-precision reference value of sum_{n>=0} 1/(n!)^3
    CHECK(std::abs(f - 2.1297025489833064) < 1e-15);

    const Complex c(-3.3, -0.75);
    const Complex g = hyper0f2(c, std::conj(c), 17.5);
    CHECK(std::abs(g.imag()) < 1e-13 * std::abs(g.real()));
  }

  TEST_CASE("scaled evaluation survives huge arguments") {
    const HyperParams hp = hyper_params({-5.0, -7.0, 0.05, 1.5});
    const ScaledComplex s = hyper0f2_scaled(hp.c, std::conj(hp.c), hp.z);
    CHECK(std::isfinite(s.mantissa.real()));
    CHECK(std::abs(s.mantissa) > 0.0);
    CHECK(mean_excitation({-5.0, -7.0, 0.05, 1.5}) > 0.0);
  }

  TEST_CASE("moments of the vacuum and normalization") {
    const ModelParams free{-1.0, 0.0, 0.5, 1.0};
    CHECK(std::abs(steady_moment(0, 0, kLow) - 1.0) < 1e-14);
    CHECK(std::abs(steady_moment(1, 1, free)) == 0.0);
    CHECK(std::abs(steady_moment(0, 2, free)) == 0.0);
    CHECK(mean_excitation(free) == 0.0);
    CHECK(mean_excitation(kLow) == doctest::Approx(steady_moment(1, 1, kLow).real()).epsilon(1e-13));
  }

  TEST_CASE("moments match the Liouvillian null space") {
    const FockDim dim(20);
    const DensityMatrix rho = steady_state_density(kLow, dim);
    const Operator a = annihilation(dim), ad = creation(dim);
    const Complex n = rho.expectation(ad * a);
    CHECK(std::abs(mean_excitation(kLow) - n) < 1e-8 * std::abs(n));
    CHECK(std::abs(steady_moment(0, 1, kLow) - rho.expectation(a)) < 1e-8 * std::abs(rho.expectation(a)));
    CHECK(std::abs(steady_moment(1, 0, kLow) - rho.expectation(ad)) < 1e-8 * std::abs(rho.expectation(ad)));
  }

  TEST_CASE("moment matrix is positive semidefinite") {
    Eigen::MatrixXcd m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = steady_moment(i, j, kLow);
    // M_ij = <a^dag^i a^j> is the Gram matrix of the vectors a^j |.>
    CHECK((m - m.adjoint()).norm() < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }

  TEST_CASE("excitation curve over detuning is single valued with one maximum") {
    ModelParams p{0.0, -7.0, 0.05, 1.5};
    int maxima = 0;
    double prev2 = 0.0, prev = 0.0;
    for (int i = 0; i <= 600; ++i) {
      p.detuning = -10.0 + 12.0 * i / 600;
      const double n = mean_excitation(p);
      REQUIRE(std::isfinite(n));
      if (i >= 2 && prev > prev2 && prev > n) ++maxima;
      prev2 = prev;
      prev = n;
    }
    CHECK(maxima == 1);
  }
}
