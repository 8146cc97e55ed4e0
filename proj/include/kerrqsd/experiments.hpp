#pragma once

// Experiment drivers on top of the trajectory engines: basin labelling, switching
// statistics, jump delocalization, the detuning-sweep hysteresis protocol and the
// ensemble decay from the metastable branch.

#include <cstdint>
#include <string>
#include <vector>

#include "kerrqsd/ensemble.hpp"
#include "kerrqsd/qsd.hpp"

namespace kerrqsd {

struct BasinMap {
  Complex lower_alpha;  // stable branch with the smaller excitation
  Complex upper_alpha;
  double radius_fraction = 0.35;

  /// Assignment radius in (q, p) units.
  double radius() const;
};

/// Throws std::invalid_argument unless the classical system has exactly two stable branches.
BasinMap make_basin_map(const ModelParams& params, double radius_fraction = 0.35);

Basin classify_point(double q, double p, const BasinMap& basins);
void classify_basin(TrajectoryRecord& record, const BasinMap& basins);

struct TransitionStats {
  std::vector<double> dwell_lower;
  std::vector<double> dwell_upper;
  double mean_exit_lower = 0.0;
  double mean_exit_upper = 0.0;
  double stderr_exit_lower = 0.0;
  double stderr_exit_upper = 0.0;
  std::size_t n_jumps = 0;
  /// Set when no jump was seen; the means are then 0.
  bool no_jumps = true;
  /// Time from the first basin entry after burn-in to the end, summed over records.
  double labeled_time = 0.0;
  /// Unfinished final segments, summed over records.
  double tail_time = 0.0;
};

/// Dwell times from labelled records. Transit samples count toward the basin that
/// was left until the other basin is entered. Requires burn_in >= 3/kappa.
TransitionStats transition_stats(const std::vector<TrajectoryRecord>& records, double burn_in, double kappa);

/// Time-weighted excitation per basin with the same bookkeeping as transition_stats.
struct BasinOccupation {
  double time_lower = 0.0;
  double time_upper = 0.0;
  double mean_n_lower = 0.0;
  double mean_n_upper = 0.0;
  double weighted_n = 0.0;
};

BasinOccupation basin_occupation(const TrajectoryRecord& record, double burn_in);

struct JumpReport {
  double t_leave = 0.0;  // last sample in the old basin
  double t_enter = 0.0;  // first sample in the new basin
  Basin from = Basin::unclassified;
  Basin to = Basin::unclassified;
  double transit_peak = 0.0;    // max varQ + varP over [t_leave, t_enter]
  double basin_baseline = 0.0;  // mean varQ + varP in the adjacent basin windows
  double ratio = 0.0;
};

/// One report per completed jump of a labelled record; empty without jumps.
/// `window` bounds the number of basin samples averaged on each side.
std::vector<JumpReport> jump_snapshots(const TrajectoryRecord& record, std::size_t window = 50);

enum class SweepEngine { classical, fixed, mqsd };
enum class SweepDirection { up, down };

struct SweepPoint {
  double detuning;
  double excitation;
  SweepDirection direction;
};

struct HysteresisOptions {
  double detuning_lo = 0.0;
  double detuning_hi = 0.0;
  double step = 0.1;
  double t_m = 50.0;
  std::uint64_t seed = 0;
  SweepEngine engine = SweepEngine::mqsd;
  /// Fixed basis size, or local size for the moving basis.
  Index basis_dim = 40;
  double dt = 1e-3;
  Scheme scheme = Scheme::exponential;
  /// Step of the classical RK4 surrogate.
  double classical_dt = 1e-2;
};

struct HysteresisRecord {
  std::vector<SweepPoint> sweep;
  double detuning_width = 0.0;
  bool jumps_found = false;
  double up_jump = 0.0;
  double down_jump = 0.0;
  double t_m = 0.0;
  double step = 0.0;
};

/// Threshold excitation at `detuning`: geometric mean of the two classical stable
/// branch excitations, with the detuning clamped into the bistable window.
double jump_threshold(const ModelParams& base, double detuning, double window_lo, double window_hi);

/// Detuning sweep up then down carrying the state; after every step the state
/// evolves for t_m and <a^dag a> is read out without disturbing it.
HysteresisRecord hysteresis_sweep(const ModelParams& base, const HysteresisOptions& options);

struct DecayFit {
  bool ok = false;
  double tau = 0.0;
  double tau_kappa = 0.0;  // tau / (1/kappa)
  double asymptote_q = 0.0;
  double asymptote_p = 0.0;
  double amplitude_q = 0.0;
  double amplitude_p = 0.0;
  /// Time origin of the amplitudes (the fit window start).
  double t_start = 0.0;
  std::string message;
};

/// Least-squares fit of q(t) = q_inf + A_q e^{-(t - t_start)/tau}, p(t) likewise with a
/// shared tau, over samples with t >= t_start.
DecayFit fit_decay(const EnsembleStats& stats, double t_start, double kappa);

struct DecayOptions {
  std::size_t n_traj = 100;
  std::uint64_t seed = 0;
  Engine engine = Engine::mqsd;
  Index basis_dim = 40;
  /// dt, t_final, scheme, record_stride.
  TrajectoryOptions trajectory;
  /// Start of the fit window; negative means 3/kappa.
  double fit_start = -1.0;
  int workers = 0;
};

struct DecayResult {
  EnsembleStats stats;
  Complex start_alpha;   // stable branch farther from the exact steady <a>
  Complex steady_alpha;  // exact steady <a>
  DecayFit fit;
};

DecayResult decay_experiment(const ModelParams& params, const DecayOptions& options);

}  // namespace kerrqsd
