#include <doctest.h>

#include <cmath>
#include <random>

#include "kerrqsd/errors.hpp"
#include "kerrqsd/hilbert.hpp"

using namespace kerrqsd;

namespace {

CVector random_vector(Index dim, Index support, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CVector v = CVector::Zero(dim);
  for (Index i = 0; i < support; ++i) v[i] = Complex(g(rng), g(rng));
  return v.normalized();
}

}  // namespace

TEST_SUITE("hilbert") {
  TEST_CASE("annihilation operator matrix elements") {
    const CMatrix a2 = annihilation(FockDim(2)).matrix();
    CHECK(a2(0, 1) == Complex(1.0));
    CHECK(a2(0, 0) == Complex(0.0));
    CHECK(a2(1, 0) == Complex(0.0));
    CHECK(a2(1, 1) == Complex(0.0));

    const CMatrix a3 = annihilation(FockDim(3)).matrix();
    CHECK(a3(0, 1) == Complex(1.0));
    CHECK(std::abs(a3(1, 2) - std::sqrt(2.0)) < 1e-15);
    CHECK((a3.cwiseAbs().array() > 0).count() == 2);

    const Operator n = creation(FockDim(7)) * annihilation(FockDim(7));
    for (Index i = 0; i < 7; ++i) CHECK(std::abs(n.matrix()(i, i) - double(i)) < 1e-14);
    CHECK(n.is_hermitian(1e-15));
  }

  TEST_CASE("dimension must be at least 2") {
    CHECK_THROWS_AS(FockDim(1), std::invalid_argument);
    CHECK_THROWS(StateVector::from_amplitudes(CVector::Zero(4)));
  }

  TEST_CASE("expectation values") {
    const FockDim dim(30);
    CHECK(std::abs(expectation(number(dim), StateVector::fock(0, dim))) < 1e-15);
    const Complex alpha(0.7, -0.4);
    CHECK(std::abs(expectation(annihilation(dim), coherent_state(alpha, dim).state) - alpha) < 1e-12);
    const StateVector psi = StateVector::from_amplitudes(random_vector(30, 30, 3));
    CHECK(std::abs(expectation(identity(dim), psi) - 1.0) < 1e-14);
  }

  TEST_CASE("coherent states") {
    const CoherentState vac = coherent_state(0.0, FockDim(10));
    CHECK(vac.state[0] == Complex(1.0));
    for (Index i = 1; i < 10; ++i) CHECK(vac.state[i] == Complex(0.0));

    const CoherentState one = coherent_state(1.0, FockDim(30));
    CHECK(std::abs(expectation(annihilation(FockDim(30)), one.state) - 1.0) < 1e-8);
    CHECK(one.truncation_deficit < 1e-15);

    const Complex alpha = Complex(7.0, 14.0) / std::sqrt(2.0);
    const Index dim = recommended_dim(alpha);
    const Quadratures qp = quadratures(coherent_state(alpha, FockDim(dim)).state);
    CHECK(qp.q == doctest::Approx(7.0).epsilon(1e-9));
    CHECK(qp.p == doctest::Approx(14.0).epsilon(1e-9));
    CHECK(qp.var_q == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(qp.var_p == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(std::abs(coherent_state(alpha, FockDim(dim)).state.amplitudes().norm() - 1.0) < 1e-10);
  }

  TEST_CASE("coherent truncation warns instead of throwing") {
    int warnings = 0;
    WarningHandler previous = set_warning_handler([&](std::string_view) { ++warnings; });
    const CoherentState c = coherent_state(Complex(4.0, 0.0), FockDim(8));
    set_warning_handler(std::move(previous));
    CHECK(warnings == 1);
    CHECK(c.truncation_deficit > 1e-8);
  }

  TEST_CASE("displacement") {
    const FockDim dim(40);
    const Complex alpha(0.9, 0.5);
    const StateVector d0 = apply_displacement(alpha, StateVector::fock(0, dim));
    CHECK((d0.amplitudes() - coherent_state(alpha, dim).state.amplitudes()).norm() < 1e-10);

    const StateVector psi = StateVector::from_amplitudes(random_vector(40, 10, 5));
    CHECK((apply_displacement(0.0, psi).amplitudes() - psi.amplitudes()).norm() < 1e-14);

    const StateVector back = apply_displacement(-alpha, d0);
    CHECK(std::abs(std::abs(back[0]) - 1.0) < 1e-8);

    const CMatrix d = displacement_operator(alpha, dim).matrix();
    CHECK((d.adjoint() * d).topLeftCorner(20, 20).isIdentity(1e-10));
  }

  TEST_CASE("quadratures of simple states") {
    const Quadratures vac = quadratures(StateVector::fock(0, FockDim(5)));
    CHECK(vac.q == doctest::Approx(0.0));
    CHECK(vac.p == doctest::Approx(0.0));
    CHECK(vac.var_q == doctest::Approx(0.5));
    CHECK(vac.var_p == doctest::Approx(0.5));

    const Quadratures one = quadratures(StateVector::fock(1, FockDim(5)));
    CHECK(one.var_q == doctest::Approx(1.5));
    CHECK(one.var_p == doctest::Approx(1.5));

    const Complex alpha(-1.2, 0.3);
    const Quadratures c = quadratures(coherent_state(alpha, FockDim(40)).state);
    CHECK(c.q == doctest::Approx(std::sqrt(2.0) * alpha.real()).epsilon(1e-12));
    CHECK(c.p == doctest::Approx(std::sqrt(2.0) * alpha.imag()).epsilon(1e-12));
    CHECK(c.var_q == doctest::Approx(0.5).epsilon(1e-10));
  }

  TEST_CASE("expm against diagonal and nilpotent closed forms") {
    CMatrix d = CMatrix::Zero(3, 3);
    d(0, 0) = Complex(0.0, 1.0);
    d(1, 1) = -2.0;
    d(2, 2) = Complex(0.5, -0.5);
    const CMatrix e = expm(d);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(e(i, i) - std::exp(d(i, i))) < 1e-13);

    CMatrix n = CMatrix::Zero(3, 3);
    n(0, 1) = 2.0;
    n(1, 2) = 3.0;
    const CMatrix en = expm(n);
    CHECK(std::abs(en(0, 2) - 3.0) < 1e-13);  // N^2 / 2 = 6 / 2
    CHECK(std::abs(en(0, 1) - 2.0) < 1e-13);
  }

  TEST_CASE("band operator matches its dense form") {
    const Index dim = 25;
    BandOperator b(dim);
    std::mt19937 rng(9);
    std::normal_distribution<double> g;
    for (Index i = 0; i < dim; ++i) {
      for (Index j = std::max<Index>(0, i - 2); j <= std::min(dim - 1, i + 2); ++j) b.at(i, j) = Complex(g(rng), g(rng));
    }
    CHECK_THROWS(b.at(0, 3));
    const CVector v = random_vector(dim, dim, 4);
    CVector out(dim);
    b.apply(std::span<const Complex>(v.data(), v.size()), std::span<Complex>(out.data(), out.size()));
    CHECK((out - b.to_dense() * v).norm() < 1e-13);
    CHECK(b.norm1() == doctest::Approx(b.to_dense().cwiseAbs().colwise().sum().maxCoeff()));
  }

  TEST_CASE("expm_action agrees with the dense exponential") {
    const Index dim = 30;
    BandOperator b(dim);
    for (Index i = 0; i < dim; ++i) {
      b.at(i, i) = Complex(-0.05 * i, -0.3 * i - 0.01 * i * i);
      if (i + 1 < dim) {
        b.at(i, i + 1) = 0.4 * std::sqrt(double(i + 1));
        b.at(i + 1, i) = -0.4 * std::sqrt(double(i + 1));
      }
      if (i + 2 < dim) b.at(i, i + 2) = Complex(0.0, 0.02);
    }
    const CVector v = random_vector(dim, 12, 8);
    for (Complex t : {Complex(0.001), Complex(0.3), Complex(2.5), Complex(0.0, 0.7)}) {
      const CVector dense = expm(t * b.to_dense()) * v;
      CHECK((expm_action(b, v, t) - dense).norm() < 1e-11 * std::max(1.0, dense.norm()));
    }
  }

  TEST_CASE("displace_vector matches dense displacement") {
    const CVector v = random_vector(60, 8, 2);
    for (Complex alpha : {Complex(0.05, -0.02), Complex(0.8, 1.1)}) {
      const CVector dense = displacement_operator(alpha, FockDim(60)).matrix() * v;
      CHECK((displace_vector(alpha, v) - dense).norm() < 1e-10);
    }
  }
}
