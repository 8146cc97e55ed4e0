// Timing of the dense reference step against the banded integrator, and of the
// serial ensemble against the OpenMP one. Usage: bench_kernels [n_traj] [steps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "kerrqsd/ensemble.hpp"
#include "kerrqsd/noise.hpp"
#include "kerrqsd/qsd.hpp"

using namespace kerrqsd;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_traj = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 64;
  const long steps = argc > 2 ? std::strtol(argv[2], nullptr, 10) : 2000;
  const ModelParams p{-3.9, -2.85, 0.3, 1.5};
  const double dt = 1e-4;

  std::printf("%-34s %8s %14s\n", "kernel", "dim", "us/step");
  for (Index dim : {40, 60, 80}) {
    const StateVector psi0 = coherent_state(Complex(0.5, 0.8), FockDim(dim)).state;

    StateVector psi = psi0;
    NoiseStream noise{7, 0};
    const double dense = seconds([&] {
      for (long s = 0; s < steps; ++s) psi = qsd_step(psi, p, dt, wiener_increment(noise, dt));
    });

    TrajectoryOptions opt;
    opt.dt = dt;
    opt.scheme = Scheme::euler;
    QsdIntegrator euler(p, DisplacedState{Complex{}, psi0}, Engine::fixed, opt);
    NoiseStream noise_b{7, 0};
    const double banded = seconds([&] { euler.advance(steps, noise_b); });

    opt.scheme = Scheme::exponential;
    opt.dt = 1e-3;
    QsdIntegrator expo(p, DisplacedState{Complex{}, psi0}, Engine::fixed, opt);
    NoiseStream noise_c{7, 0};
    const double exponential = seconds([&] { expo.advance(steps, noise_c); });

    std::printf("%-34s %8ld %14.3f\n", "dense qsd_step (euler)", static_cast<long>(dim), 1e6 * dense / steps);
    std::printf("%-34s %8ld %14.3f\n", "banded integrator (euler)", static_cast<long>(dim), 1e6 * banded / steps);
    std::printf("%-34s %8ld %14.3f\n", "banded integrator (exponential)", static_cast<long>(dim),
                1e6 * exponential / steps);
  }

  EnsembleOptions e;
  e.n_traj = n_traj;
  e.master_seed = 11;
  e.engine = Engine::mqsd;
  e.trajectory.dt = 1e-3;
  e.trajectory.t_final = 2.0;
  e.trajectory.record_stride = 100;
  const DisplacedState start = displaced_vacuum(Complex(-0.1, 0.6), FockDim(40));

  EnsembleResult serial, parallel;
  const double t_serial = seconds([&] { serial = run_ensemble_serial(start, p, e); });
  const double t_parallel = seconds([&] { parallel = run_ensemble(start, p, e); });
  const bool same = serial.stats.mean_n == parallel.stats.mean_n && serial.stats.stderr_q == parallel.stats.stderr_q;
  std::printf("\nensemble of %zu mqsd trajectories, %d OpenMP threads\n", n_traj, omp_get_max_threads());
  std::printf("  serial   %9.3f s\n  parallel %9.3f s  (speedup %.2f)\n", t_serial, t_parallel,
              t_serial / t_parallel);
  std::printf("  bit-identical statistics: %s\n", same ? "yes" : "NO");
  return same ? 0 : 1;
}
