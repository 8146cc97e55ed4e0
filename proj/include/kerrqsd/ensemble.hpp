#pragma once

// Many independent trajectories with derived seeds, reduced in trajectory-index order
// so the result does not depend on how many workers ran them.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kerrqsd/master.hpp"
#include "kerrqsd/qsd.hpp"

namespace kerrqsd {

struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_q, mean_p, mean_n;
  std::vector<double> stderr_q, stderr_p, stderr_n;
  std::size_t n_traj = 0;
};

struct EnsembleOptions {
  std::size_t n_traj = 2;
  std::uint64_t master_seed = 0;
  Engine engine = Engine::fixed;
  /// dt, t_final, scheme, record_stride, thresholds; the seed field is ignored.
  TrajectoryOptions trajectory;
  /// Keep every final state re-expanded into a basis of this size (0 = discard).
  Index final_state_dim = 0;
  /// Keep every per-trajectory record.
  bool keep_records = false;
  /// OpenMP threads; 0 uses the runtime default.
  int workers = 0;
};

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<StateVector> final_states;
  std::vector<TrajectoryRecord> records;
};

/// OpenMP-parallel ensemble. Throws std::runtime_error naming the lowest failing
/// trajectory index and its seed if any trajectory fails.
EnsembleResult run_ensemble(const DisplacedState& psi0, const ModelParams& params,
                            const EnsembleOptions& options);

/// Single-threaded reference; bit-identical to run_ensemble.
EnsembleResult run_ensemble_serial(const DisplacedState& psi0, const ModelParams& params,
                                   const EnsembleOptions& options);

/// Mean of projectors. Throws std::invalid_argument on an empty list or mixed bases.
DensityMatrix density_from_ensemble(const std::vector<StateVector>& states);

/// Streaming mean/variance per grid point; merge order defines the bits.
class WelfordGrid {
 public:
  explicit WelfordGrid(std::size_t points = 0);
  void add(const std::vector<double>& values);
  std::size_t count() const noexcept { return count_; }
  double mean(std::size_t i) const { return mean_.at(i); }
  /// Sample standard deviation / sqrt(count); 0 for count < 2.
  double standard_error(std::size_t i) const;

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_, m2_;
};

}  // namespace kerrqsd
