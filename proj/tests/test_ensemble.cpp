#include <doctest.h>

#include <cmath>

#include "kerrqsd/ensemble.hpp"
#include "kerrqsd/master.hpp"

using namespace kerrqsd;

namespace {

const ModelParams kLow{-1.0, 0.5, 0.5, 1.0};

EnsembleOptions small_options(int workers) {
  EnsembleOptions e;
  e.n_traj = 37;
  e.master_seed = 2024;
  e.engine = Engine::mqsd;
  e.trajectory.dt = 2e-3;
  e.trajectory.t_final = 0.6;
  e.trajectory.record_stride = 25;
  e.workers = workers;
  return e;
}

}  // namespace

TEST_SUITE("ensemble") {
  TEST_CASE("parallel and serial runs are bit-identical for any worker count") {
    const DisplacedState start = displaced_vacuum(Complex(0.4, -0.3), FockDim(20));
    const EnsembleResult ref = run_ensemble_serial(start, kLow, small_options(1));
    for (int w : {1, 4, 16}) {
      const EnsembleResult par = run_ensemble(start, kLow, small_options(w));
      CHECK(par.stats.mean_q == ref.stats.mean_q);
      CHECK(par.stats.mean_p == ref.stats.mean_p);
      CHECK(par.stats.mean_n == ref.stats.mean_n);
      CHECK(par.stats.stderr_n == ref.stats.stderr_n);
    }
    CHECK(ref.stats.n_traj == 37);
    CHECK(ref.stats.times.size() == 13);
  }

  TEST_CASE("linear coherent ensemble is deterministic") {
    EnsembleOptions e = small_options(0);
    e.n_traj = 16;
    const ModelParams lin{-0.6, 0.0, 0.0, 1.0};
    const EnsembleResult r = run_ensemble(displaced_vacuum(Complex(1.0, 0.5), FockDim(12)), lin, e);
    for (std::size_t i = 0; i < r.stats.times.size(); ++i) {
      CHECK(r.stats.stderr_q[i] < 1e-10);
      CHECK(r.stats.stderr_n[i] < 1e-10);
    }
  }

  TEST_CASE("density reconstruction") {
    const FockDim dim(4);
    const StateVector a = StateVector::fock(1, dim);
    CHECK(density_from_ensemble({a}).matrix().isApprox(DensityMatrix::pure(a).matrix()));
    const DensityMatrix mix = density_from_ensemble({StateVector::fock(0, dim), a});
    CHECK(std::abs(mix.matrix()(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(mix.matrix()(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(mix.matrix()(0, 1)) < 1e-15);
    CHECK_THROWS_AS(density_from_ensemble({}), std::invalid_argument);
    CHECK_THROWS_AS(density_from_ensemble({a, StateVector::fock(0, FockDim(5))}), std::invalid_argument);
  }

  TEST_CASE("reconstructed density approaches the master solution") {
    const FockDim dim(12);
    const StateVector psi0 = StateVector::fock(2, dim);
    EnsembleOptions e;
    e.n_traj = 2000;
    e.master_seed = 5;
    e.engine = Engine::fixed;
    e.trajectory.dt = 2e-3;
    e.trajectory.t_final = 5.0;
    e.trajectory.record_stride = 500;
    e.final_state_dim = 12;
    const EnsembleResult r = run_ensemble(DisplacedState{Complex{}, psi0}, kLow, e);
    REQUIRE(r.final_states.size() == 2000);
    const DensityMatrix rho = evolve_master(DensityMatrix::pure(psi0), kLow, 5.0, 0.005);
    CHECK((density_from_ensemble(r.final_states).matrix() - rho.matrix()).norm() < 5.0 / std::sqrt(2000.0));
  }

  TEST_CASE("failures name the trajectory") {
    EnsembleOptions e = small_options(2);
    e.engine = Engine::fixed;
    e.trajectory.t_final = 3.0;
    const ModelParams strong{-5.0, -7.0, 0.05, 1.5};
    try {
      (void)run_ensemble(DisplacedState{Complex{}, StateVector::fock(0, FockDim(6))}, strong, e);
      FAIL("expected a truncation failure");
    } catch (const std::runtime_error& err) {
      CHECK(std::string(err.what()).find("trajectory 0") != std::string::npos);
    }
  }

  TEST_CASE("Welford grid") {
    WelfordGrid g(2);
    g.add({1.0, 10.0});
    CHECK(g.standard_error(0) == 0.0);
    g.add({3.0, 10.0});
    g.add({5.0, 10.0});
    CHECK(g.count() == 3);
    CHECK(g.mean(0) == doctest::Approx(3.0));
    CHECK(g.standard_error(0) == doctest::Approx(2.0 / std::sqrt(3.0)));
    CHECK(g.standard_error(1) == 0.0);
    CHECK_THROWS(g.add({1.0}));
  }
}
