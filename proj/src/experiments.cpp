#include "kerrqsd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "kerrqsd/classical.hpp"
#include "kerrqsd/exact_steady.hpp"

namespace kerrqsd {

namespace {

Complex to_qp(Complex alpha) { return std::sqrt(2.0) * alpha; }

std::vector<SteadyBranch> stable_branches(const ModelParams& params) {
  std::vector<SteadyBranch> out;
  for (const SteadyBranch& b : steady_states(params)) {
    if (b.stable) out.push_back(b);
  }
  return out;
}

bool is_basin(Basin b) { return b == Basin::lower || b == Basin::upper; }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// First sample at or after burn_in that lies in a basin; size() if none.
std::size_t first_basin_entry(const TrajectoryRecord& r, double burn_in) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.times[i] >= burn_in && is_basin(r.basin[i])) return i;
  }
  return r.size();
}

}  // namespace

double BasinMap::radius() const { return radius_fraction * std::abs(to_qp(upper_alpha) - to_qp(lower_alpha)); }

BasinMap make_basin_map(const ModelParams& params, double radius_fraction) {
  if (!(radius_fraction > 0.0 && radius_fraction < 0.5)) {
    throw std::invalid_argument("make_basin_map: radius_fraction must lie in (0, 0.5)");
  }
  const auto stable = stable_branches(params);
  if (stable.size() != 2) {
    throw std::invalid_argument("make_basin_map: parameters are not bistable (need exactly two stable branches)");
  }
  return {stable[0].alpha, stable[1].alpha, radius_fraction};
}

Basin classify_point(double q, double p, const BasinMap& basins) {
  const Complex x(q, p);
  const double r = basins.radius();
  if (std::abs(x - to_qp(basins.lower_alpha)) <= r) return Basin::lower;
  if (std::abs(x - to_qp(basins.upper_alpha)) <= r) return Basin::upper;
  return Basin::transit;
}

void classify_basin(TrajectoryRecord& record, const BasinMap& basins) {
  record.basin.resize(record.size());
  for (std::size_t i = 0; i < record.size(); ++i) record.basin[i] = classify_point(record.q[i], record.p[i], basins);
}

TransitionStats transition_stats(const std::vector<TrajectoryRecord>& records, double burn_in, double kappa) {
  if (!(kappa > 0.0) || burn_in < 3.0 / kappa * (1.0 - 1e-12)) {
    throw std::invalid_argument("transition_stats: burn_in must be at least 3/kappa");
  }
  TransitionStats s;
  for (const TrajectoryRecord& r : records) {
    if (r.basin.size() != r.size()) throw std::invalid_argument("transition_stats: record is not labelled");
    const std::size_t start = first_basin_entry(r, burn_in);
    if (start >= r.size()) continue;
    Basin current = r.basin[start];
    double seg_start = r.times[start];
    for (std::size_t i = start + 1; i < r.size(); ++i) {
      const Basin b = r.basin[i];
      if (!is_basin(b) || b == current) continue;
      const double dwell = r.times[i] - seg_start;
      (current == Basin::lower ? s.dwell_lower : s.dwell_upper).push_back(dwell);
      ++s.n_jumps;
      current = b;
      seg_start = r.times[i];
    }
    s.labeled_time += r.times.back() - r.times[start];
    s.tail_time += r.times.back() - seg_start;
  }
  s.no_jumps = s.n_jumps == 0;
  s.mean_exit_lower = mean_of(s.dwell_lower);
  s.mean_exit_upper = mean_of(s.dwell_upper);
  s.stderr_exit_lower = stderr_of(s.dwell_lower);
  s.stderr_exit_upper = stderr_of(s.dwell_upper);
  return s;
}

BasinOccupation basin_occupation(const TrajectoryRecord& r, double burn_in) {
  if (r.basin.size() != r.size()) throw std::invalid_argument("basin_occupation: record is not labelled");
  BasinOccupation o;
  const std::size_t start = first_basin_entry(r, burn_in);
  if (start >= r.size()) return o;
  Basin current = r.basin[start];
  double sum_lower = 0.0, sum_upper = 0.0;
  std::size_t n_lower = 0, n_upper = 0;
  for (std::size_t i = start; i < r.size(); ++i) {
    if (is_basin(r.basin[i])) current = r.basin[i];
    if (current == Basin::lower) {
      sum_lower += r.excitation[i];
      ++n_lower;
    } else {
      sum_upper += r.excitation[i];
      ++n_upper;
    }
  }
  const double total = static_cast<double>(n_lower + n_upper);
  const double span = r.times.back() - r.times[start];
  o.time_lower = span * static_cast<double>(n_lower) / total;
  o.time_upper = span * static_cast<double>(n_upper) / total;
  o.mean_n_lower = n_lower > 0 ? sum_lower / static_cast<double>(n_lower) : 0.0;
  o.mean_n_upper = n_upper > 0 ? sum_upper / static_cast<double>(n_upper) : 0.0;
  o.weighted_n = (sum_lower + sum_upper) / total;
  return o;
}

std::vector<JumpReport> jump_snapshots(const TrajectoryRecord& r, std::size_t window) {
  if (r.basin.size() != r.size()) throw std::invalid_argument("jump_snapshots: record is not labelled");
  std::vector<JumpReport> out;
  auto spread = [&](std::size_t i) { return r.var_q[i] + r.var_p[i]; };
  std::size_t last_basin = r.size();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Basin b = r.basin[i];
    if (!is_basin(b)) continue;
    if (last_basin < r.size() && b != r.basin[last_basin]) {
      JumpReport rep;
      rep.t_leave = r.times[last_basin];
      rep.t_enter = r.times[i];
      rep.from = r.basin[last_basin];
      rep.to = b;
      for (std::size_t k = last_basin; k <= i; ++k) rep.transit_peak = std::max(rep.transit_peak, spread(k));
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t k = last_basin + 1, taken = 0; k-- > 0 && taken < window;) {
        if (r.basin[k] != rep.from) break;
        sum += spread(k);
        ++count;
        ++taken;
      }
      for (std::size_t k = i, taken = 0; k < r.size() && taken < window; ++k, ++taken) {
        if (r.basin[k] != rep.to) break;
        sum += spread(k);
        ++count;
      }
      rep.basin_baseline = sum / static_cast<double>(count);
      rep.ratio = rep.basin_baseline > 0.0 ? rep.transit_peak / rep.basin_baseline : 0.0;
      out.push_back(rep);
    }
    last_basin = i;
  }
  return out;
}

double jump_threshold(const ModelParams& base, double detuning, double window_lo, double window_hi) {
  const double pad = 1e-6 * (window_hi - window_lo);
  ModelParams p = base;
  p.detuning = std::clamp(detuning, window_lo + pad, window_hi - pad);
  const auto branches = steady_states(p);
  double n_lo = branches.front().excitation, n_hi = branches.back().excitation;
  const auto stable = stable_branches(p);
  if (stable.size() == 2) {
    n_lo = stable.front().excitation;
    n_hi = stable.back().excitation;
  }
  return std::sqrt(n_lo * n_hi);
}

namespace {

// One readout per detuning; the state is carried between calls.
class SweepRunner {
 public:
  SweepRunner(const ModelParams& start, const HysteresisOptions& o) : opts_(o) {
    const auto stable = stable_branches(start);
    const Complex alpha0 = stable.empty() ? Complex{} : stable.front().alpha;
    if (o.engine == SweepEngine::classical) {
      alpha_ = alpha0;
      params_ = start;
      return;
    }
    TrajectoryOptions t;
    t.dt = o.dt;
    t.scheme = o.scheme;
    t.seed = o.seed;
    const FockDim dim(o.basis_dim);
    if (o.engine == SweepEngine::mqsd) {
      integ_.emplace(start, displaced_vacuum(alpha0, dim), Engine::mqsd, t);
    } else {
      integ_.emplace(start, DisplacedState{Complex{}, coherent_state(alpha0, dim).state}, Engine::fixed, t);
    }
    noise_ = NoiseStream{o.seed, 0};
  }

  double measure(const ModelParams& p) {
    if (!integ_) {
      alpha_ = integrate_mean_field(alpha_, p, opts_.t_m, opts_.classical_dt);
      return std::norm(alpha_);
    }
    integ_->set_params(p);
    integ_->advance(std::lround(opts_.t_m / opts_.dt), noise_);
    return integ_->moments().ada;
  }

 private:
  HysteresisOptions opts_;
  ModelParams params_;
  Complex alpha_{};
  std::optional<QsdIntegrator> integ_;
  NoiseStream noise_{};
};

// Midpoint of the first threshold crossing along a sweep, if any.
std::optional<double> first_crossing(const std::vector<SweepPoint>& pts, const std::vector<double>& thr) {
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const bool before = pts[k - 1].excitation > thr[k - 1];
    const bool after = pts[k].excitation > thr[k];
    if (before != after) return 0.5 * (pts[k - 1].detuning + pts[k].detuning);
  }
  return std::nullopt;
}

}  // namespace

HysteresisRecord hysteresis_sweep(const ModelParams& base, const HysteresisOptions& o) {
  base.validate();
  if (!(o.step > 0.0) || !(o.detuning_hi > o.detuning_lo)) {
    throw std::invalid_argument("hysteresis_sweep: need step > 0 and detuning_hi > detuning_lo");
  }
  if (!(o.t_m > 0.0)) throw std::invalid_argument("hysteresis_sweep: t_m must be positive");
  if (o.t_m < 10.0 / base.kappa) {
    std::ostringstream os;
    os << "hysteresis_sweep: t_m = " << o.t_m << " is below 10/kappa = " << 10.0 / base.kappa;
    warn(os.str());
  }
  const long points = std::lround((o.detuning_hi - o.detuning_lo) / o.step);
  auto detuning_at = [&](long k) { return o.detuning_lo + static_cast<double>(k) * o.step; };

  ModelParams p = base;
  p.detuning = o.detuning_lo;
  SweepRunner runner(p, o);
  HysteresisRecord rec;
  rec.t_m = o.t_m;
  rec.step = o.step;
  for (long k = 0; k <= points; ++k) {
    p.detuning = detuning_at(k);
    rec.sweep.push_back({p.detuning, runner.measure(p), SweepDirection::up});
  }
  for (long k = points; k >= 0; --k) {
    p.detuning = detuning_at(k);
    rec.sweep.push_back({p.detuning, runner.measure(p), SweepDirection::down});
  }

  const auto window = base.chi > 0.0 ? bistable_window(base, o.detuning_lo, o.detuning_hi) : std::nullopt;
  if (!window) return rec;
  std::vector<SweepPoint> up(rec.sweep.begin(), rec.sweep.begin() + points + 1);
  std::vector<SweepPoint> down(rec.sweep.begin() + points + 1, rec.sweep.end());
  std::vector<double> thr_up, thr_down;
  for (const auto& s : up) thr_up.push_back(jump_threshold(base, s.detuning, window->lower, window->upper));
  for (const auto& s : down) thr_down.push_back(jump_threshold(base, s.detuning, window->lower, window->upper));
  const auto up_jump = first_crossing(up, thr_up);
  const auto down_jump = first_crossing(down, thr_down);
  if (up_jump && down_jump) {
    rec.jumps_found = true;
    rec.up_jump = *up_jump;
    rec.down_jump = *down_jump;
    rec.detuning_width = std::abs(*up_jump - *down_jump);
  }
  return rec;
}

DecayFit fit_decay(const EnsembleStats& stats, double t_start, double kappa) {
  DecayFit fit;
  fit.t_start = t_start;
  std::vector<double> t, q, p;
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    if (stats.times[i] >= t_start) {
      t.push_back(stats.times[i] - t_start);
      q.push_back(stats.mean_q[i]);
      p.push_back(stats.mean_p[i]);
    }
  }
  if (t.size() < 4) {
    fit.message = "fit_decay: fewer than 4 samples in the fit window";
    return fit;
  }
  struct Linear {
    double c0, c1, sse;
  };
  auto linear = [&](double tau, const std::vector<double>& y) {
    double s00 = 0, s01 = 0, s11 = 0, b0 = 0, b1 = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = std::exp(-t[i] / tau);
      s00 += 1.0;
      s01 += e;
      s11 += e * e;
      b0 += y[i];
      b1 += e * y[i];
    }
    const double det = s00 * s11 - s01 * s01;
    Linear l{0.0, 0.0, 0.0};
    if (std::abs(det) < 1e-300) return Linear{mean_of(y), 0.0, 1e300};
    l.c0 = (s11 * b0 - s01 * b1) / det;
    l.c1 = (s00 * b1 - s01 * b0) / det;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = y[i] - l.c0 - l.c1 * std::exp(-t[i] / tau);
      l.sse += r * r;
    }
    return l;
  };
  auto cost = [&](double log_tau) {
    const double tau = std::exp(log_tau);
    return linear(tau, q).sse + linear(tau, p).sse;
  };
  const double span = t.back();
  const double lo = std::log(0.1 / kappa), hi = std::log(100.0 * span);
  constexpr int grid = 400;
  int best = 0;
  double best_cost = cost(lo);
  for (int i = 1; i <= grid; ++i) {
    const double c = cost(lo + (hi - lo) * i / grid);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  if (best == 0 || best == grid) {
    fit.message = "fit_decay: optimum at the edge of the time-constant search range";
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / grid;
  double b = lo + (hi - lo) * std::min(grid, best + 1) / grid;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = cost(x2);
    }
  }
  fit.tau = std::exp(0.5 * (a + b));
  const Linear lq = linear(fit.tau, q), lp = linear(fit.tau, p);
  fit.asymptote_q = lq.c0;
  fit.asymptote_p = lp.c0;
  fit.amplitude_q = lq.c1;
  fit.amplitude_p = lp.c1;
  fit.tau_kappa = fit.tau * kappa;
  fit.ok = fit.message.empty();
  return fit;
}

DecayResult decay_experiment(const ModelParams& params, const DecayOptions& o) {
  const auto stable = stable_branches(params);
  if (stable.size() != 2) throw std::invalid_argument("decay_experiment: parameters are not bistable");
  DecayResult res;
  res.steady_alpha = steady_moment(0, 1, params);
  res.start_alpha = std::abs(stable[0].alpha - res.steady_alpha) > std::abs(stable[1].alpha - res.steady_alpha)
                        ? stable[0].alpha
                        : stable[1].alpha;
  EnsembleOptions e;
  e.n_traj = o.n_traj;
  e.master_seed = o.seed;
  e.engine = o.engine;
  e.trajectory = o.trajectory;
  e.workers = o.workers;
  const DisplacedState psi0 = o.engine == Engine::mqsd
                                  ? displaced_vacuum(res.start_alpha, FockDim(o.basis_dim))
                                  : DisplacedState{Complex{}, coherent_state(res.start_alpha, FockDim(o.basis_dim)).state};
  res.stats = run_ensemble(psi0, params, e).stats;
  const double t_start = o.fit_start >= 0.0 ? o.fit_start : 3.0 / params.kappa;
  res.fit = fit_decay(res.stats, t_start, params.kappa);
  return res;
}

}  // namespace kerrqsd
