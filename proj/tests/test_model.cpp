#include <doctest.h>

#include <cmath>

#include "kerrqsd/model.hpp"

using namespace kerrqsd;

TEST_SUITE("model") {
  TEST_CASE("hamiltonian matrix elements") {
    const CMatrix h = hamiltonian({1.0, 0.0, 0.0, 1.0}, FockDim(2)).matrix();
    CHECK(h(0, 0) == Complex(0.0));
    CHECK(h(1, 1) == Complex(1.0));
    CHECK(h(0, 1) == Complex(0.0));

    const CMatrix hb = hamiltonian({0.0, 0.8, 0.0, 1.0}, FockDim(4)).matrix();
    CHECK(std::abs(hb(1, 0) - 0.8) < 1e-15);
    CHECK(std::abs(hb(0, 1) - 0.8) < 1e-15);

    const CMatrix hk = hamiltonian({-5.0, -7.0, 0.05, 1.5}, FockDim(20)).matrix();
    CHECK(std::abs(hk(10, 10) - (-45.0)) < 1e-12);
    CHECK(hamiltonian({-5.0, -7.0, 0.05, 1.5}, FockDim(20)).is_hermitian(1e-14));
  }

  TEST_CASE("lindblad operator") {
    const CMatrix l = lindblad({0.0, 0.0, 0.0, 1.5}, FockDim(2)).matrix();
    CHECK(std::abs(l(0, 1) - std::sqrt(1.5)) < 1e-15);
    CHECK(l(1, 0) == Complex(0.0));
    CHECK(lindblad({0.0, 0.0, 0.0, 1.0}, FockDim(3)).matrix().isApprox(annihilation(FockDim(3)).matrix()));
    CHECK(std::abs(lindblad({0.0, 0.0, 0.0, 4.0}, FockDim(3)).matrix()(0, 1) - 2.0) < 1e-15);
  }

  TEST_CASE("parameter preconditions") {
    CHECK_THROWS_AS(ModelParams({0.0, 1.0, -1.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams({0.0, 1.0, 0.1, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams({NAN, 1.0, 0.1, 1.0}).validate(), std::invalid_argument);
    CHECK_NOTHROW(ModelParams({-5.0, -7.0, 0.05, 1.5}).validate());
  }
}
