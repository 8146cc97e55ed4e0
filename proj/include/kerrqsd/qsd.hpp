#pragma once

// Quantum state diffusion for the Kerr oscillator (single channel L = sqrt(kappa) a):
//
//   |dpsi> = -iH|psi> dt - 1/2 (L^dag L + <L^dag><L> - 2<L^dag> L)|psi> dt
//            + (L - <L>)|psi> dxi,     M(|dxi|^2) = dt,
//
// integrated either in a fixed Fock basis or in a moving (displaced) basis where the
// physical state is D(alpha_b)|local> and alpha_b follows <a>.
//
// Both engines run the same banded kernel: the fixed engine is the moving-basis
// kernel with alpha_b pinned at 0, so for matched noise the two differ only by
// truncation and re-centering error.

#include <cstdint>
#include <functional>
#include <vector>

#include "kerrqsd/model.hpp"
#include "kerrqsd/noise.hpp"

namespace kerrqsd {

enum class Scheme {
  /// Explicit Euler-Maruyama with post-step renormalization.
  euler,
  /// Drift operator (expectations frozen at the step start) integrated exactly by
  /// its exponential; same Ito noise term; renormalized. Stays accurate at steps
  /// far beyond the explicit stability bound.
  exponential,
};

enum class Engine { fixed, mqsd };

/// Frame-corrected moments of the physical state.
struct Moments {
  Complex a;     // <a>
  Complex a2;    // <a^2>
  double ada;    // <a^dag a>
  Complex ada2;  // <a^dag a^2>
};

struct Observables {
  double q;
  double p;
  double var_q;
  double var_p;
  double excitation;
};

Observables observables_from(const Moments& m);

enum class Basin : std::uint8_t { unclassified, lower, upper, transit };

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> var_q;
  std::vector<double> var_p;
  std::vector<double> excitation;
  /// Filled by classify_basin; unclassified until then.
  std::vector<Basin> basin;

  std::size_t size() const noexcept { return times.size(); }
  void push(double t, const Observables& obs);
};

/// Physical state D(base)|local>.
struct DisplacedState {
  Complex base;
  StateVector local;
};

/// Coherent state |alpha> as a displaced vacuum.
DisplacedState displaced_vacuum(Complex alpha, FockDim local_dim);

/// Re-expands a displaced state into a fixed basis of size `dim` >= local dim.
StateVector to_fixed_basis(const DisplacedState& state, FockDim dim);

struct TrajectoryOptions {
  double dt = 1e-3;
  double t_final = 1.0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::exponential;
  /// Observables are recorded at step 0 and every `record_stride` steps.
  long record_stride = 100;
  /// Moving basis re-centres when |<a~>_local| exceeds this.
  double recenter_threshold = 0.1;
  /// Abort when the top two basis populations exceed this.
  double truncation_tolerance = 1e-6;
};

/// 0.01 / max(kappa n_max, |dw| n_max, chi n_max^2): stability bound for Scheme::euler.
double euler_dt_bound(const ModelParams& params, double n_max);

/// Per-step data for the mean-field consistency check.
struct StepSample {
  double dt;
  Complex dxi;
  Moments before;
  Complex a_after;
};

using StepSink = std::function<void(const StepSample&)>;

/// Dense Euler-Maruyama step in a fixed basis (reference kernel).
/// Throws NumericalError if the norm drifts by more than 10% before renormalization.
StateVector qsd_step(const StateVector& psi, const ModelParams& params, double dt, Complex dxi);

/// Stateful trajectory integrator shared by both engines.
class QsdIntegrator {
 public:
  /// For Engine::fixed the initial state is expanded into a fixed basis of the
  /// local dimension and never displaced again.
  QsdIntegrator(const ModelParams& params, const DisplacedState& initial, Engine engine,
                const TrajectoryOptions& options);

  /// Swap model parameters, keeping the state (adiabatic sweeps).
  void set_params(const ModelParams& params);
  const ModelParams& params() const noexcept { return params_; }

  /// One step with the given increment.
  void step(Complex dxi, const StepSink* sink = nullptr);
  /// `count` steps drawing increments from `noise`.
  void advance(long count, NoiseStream& noise, const StepSink* sink = nullptr);

  Moments moments() const;
  Observables observables() const { return observables_from(moments()); }
  DisplacedState state() const;
  double time() const noexcept { return time_; }
  long recenterings() const noexcept { return recenterings_; }
  Index basis_dim() const noexcept { return dim_; }
  const TrajectoryOptions& options() const noexcept { return opts_; }

 private:
  void rebuild_frame();
  void recenter_if_needed();
  void check_truncation() const;
  void apply_drift_exponential(double dt);

  ModelParams params_;
  Engine engine_;
  TrajectoryOptions opts_;
  Index dim_;
  Complex base_;
  CVector psi_;
  BandOperator generator_;  // -i H~ - (kappa/2) N~ in the current frame
  BandOperator drift_;      // generator_ plus the state-dependent <L^dag> L part
  CVector sqrt_n_;
  CVector work_a_, work_b_, work_c_, noise_vec_;
  double time_ = 0.0;
  long recenterings_ = 0;
};

struct FixedRun {
  TrajectoryRecord record;
  StateVector final_state;
};

struct MqsdRun {
  TrajectoryRecord record;
  DisplacedState final_state;
  long recenterings = 0;
};

/// Fixed-basis trajectory; one Wiener increment per step from options.seed.
FixedRun evolve_fixed(const StateVector& psi0, const ModelParams& params,
                      const TrajectoryOptions& options, const StepSink* sink = nullptr);

/// Moving-basis trajectory; same increment sequence as evolve_fixed for the same seed.
MqsdRun evolve_mqsd(const DisplacedState& psi0, const ModelParams& params,
                    const TrajectoryOptions& options, const StepSink* sink = nullptr);

struct MeanFieldCheck {
  /// |d<a> - (mean-field drift dt + noise terms)| per step.
  double max_raw = 0.0;
  double rms_raw = 0.0;
  /// Same residual after removing the zero-mean quadratic-variation term
  /// kappa (|dxi|^2 - dt) <b^dag b b>, b = a - <a>; this is the O(dt^{3/2}) remainder.
  double max_residual = 0.0;
  double rms_residual = 0.0;
  std::size_t steps = 0;
};

MeanFieldCheck check_mean_field(const std::vector<StepSample>& samples, const ModelParams& params);

}  // namespace kerrqsd
