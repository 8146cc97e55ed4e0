#include <doctest.h>

#include <cmath>
#include <numeric>

#include "kerrqsd/classical.hpp"
#include "kerrqsd/experiments.hpp"

using namespace kerrqsd;

namespace {

const ModelParams kStrong{-5.0, -7.0, 0.05, 1.5};
const ModelParams kMid{-3.9, -2.85, 0.3, 1.5};

// Record sitting on one amplitude with coherent variances, labelled by `label(t)`.
TrajectoryRecord synthetic(double dt, std::size_t n, Basin (*label)(double)) {
  TrajectoryRecord r;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    const Basin b = label(t);
    const double n_exc = b == Basin::upper ? 7.0 : 1.0;
    r.push(t, {0.0, 0.0, 0.5, 0.5, n_exc});
    r.basin[i] = b;
  }
  return r;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("basin labels") {
    const BasinMap m = make_basin_map(kStrong);
    const double s = std::sqrt(2.0);
    CHECK(classify_point(s * m.lower_alpha.real(), s * m.lower_alpha.imag(), m) == Basin::lower);
    CHECK(classify_point(s * m.upper_alpha.real(), s * m.upper_alpha.imag(), m) == Basin::upper);
    const Complex mid = 0.5 * (m.lower_alpha + m.upper_alpha);
    CHECK(classify_point(s * mid.real(), s * mid.imag(), m) == Basin::transit);
    CHECK(m.radius() == doctest::Approx(0.35 * s * std::abs(m.upper_alpha - m.lower_alpha)));
    CHECK(std::norm(m.lower_alpha) < std::norm(m.upper_alpha));
    CHECK_THROWS_AS(make_basin_map({1.0, 0.5, 0.05, 1.5}), std::invalid_argument);
  }

  TEST_CASE("periodic labels give equal dwells") {
    const double period = 4.0;
    auto label = [](double t) { return std::fmod(std::floor(t / 4.0), 2.0) == 0.0 ? Basin::lower : Basin::upper; };
    const TrajectoryRecord r = synthetic(0.5, 200, label);
    const TransitionStats ts = transition_stats({r}, 4.0, 1.0);
    CHECK_FALSE(ts.no_jumps);
    CHECK(ts.n_jumps == ts.dwell_lower.size() + ts.dwell_upper.size());
    for (double d : ts.dwell_lower) CHECK(d == doctest::Approx(period));
    for (double d : ts.dwell_upper) CHECK(d == doctest::Approx(period));
    CHECK(ts.mean_exit_lower == doctest::Approx(period));
    const double dwell_sum = std::accumulate(ts.dwell_lower.begin(), ts.dwell_lower.end(), 0.0) +
                             std::accumulate(ts.dwell_upper.begin(), ts.dwell_upper.end(), 0.0);
    CHECK(ts.labeled_time == doctest::Approx(dwell_sum + ts.tail_time).epsilon(1e-14));
    CHECK_THROWS(transition_stats({r}, 1.0, 1.0));
  }

  TEST_CASE("transit samples count toward the basin that was left") {
    auto label = [](double t) {
      if (t < 10.0) return Basin::lower;
      if (t < 12.0) return Basin::transit;
      if (t < 30.0) return Basin::upper;
      return Basin::lower;
    };
    const TrajectoryRecord r = synthetic(0.5, 80, label);
    const TransitionStats ts = transition_stats({r}, 3.0, 1.0);
    REQUIRE(ts.dwell_lower.size() == 1);
    REQUIRE(ts.dwell_upper.size() == 1);
    CHECK(ts.dwell_lower[0] == doctest::Approx(12.0 - 3.0));
    CHECK(ts.dwell_upper[0] == doctest::Approx(18.0));
    CHECK(ts.tail_time == doctest::Approx(39.5 - 30.0));
    const BasinOccupation occ = basin_occupation(r, 3.0);
    CHECK(occ.mean_n_lower == doctest::Approx(1.0));
    CHECK(occ.mean_n_upper == doctest::Approx(7.0));
    CHECK(occ.weighted_n > 1.0);
    CHECK(occ.weighted_n < 7.0);
  }

  TEST_CASE("no jump, no report") {
    const TrajectoryRecord r = synthetic(0.5, 50, [](double) { return Basin::lower; });
    CHECK(jump_snapshots(r).empty());
    CHECK(transition_stats({r}, 3.0, 1.0).no_jumps);
  }

  TEST_CASE("jump report on a coherent baseline") {
    TrajectoryRecord r = synthetic(0.5, 60, [](double t) {
      return t < 10.0 ? Basin::lower : (t < 12.0 ? Basin::transit : Basin::upper);
    });
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r.basin[i] == Basin::transit) r.var_q[i] = 3.0;
    }
    const auto jumps = jump_snapshots(r);
    REQUIRE(jumps.size() == 1);
    CHECK(jumps[0].from == Basin::lower);
    CHECK(jumps[0].to == Basin::upper);
    CHECK(jumps[0].basin_baseline == doctest::Approx(1.0));
    CHECK(jumps[0].transit_peak == doctest::Approx(3.5));
    CHECK(jumps[0].ratio == doctest::Approx(3.5));
  }

  TEST_CASE("jump threshold is the geometric mean of stable excitations") {
    const auto w = bistable_window(kStrong, -20.0, 5.0);
    REQUIRE(w);
    const auto b = steady_states(kStrong);
    CHECK(jump_threshold(kStrong, -5.0, w->lower, w->upper) ==
          doctest::Approx(std::sqrt(b[0].excitation * b[2].excitation)));
  }

  TEST_CASE("classical sweep recovers the window") {
    const ModelParams base{0.0, -7.0, 0.05, 1.5};
    const auto w = bistable_window(base, -10.0, -2.0);
    REQUIRE(w);
    HysteresisOptions h;
    h.detuning_lo = -10.0;
    h.detuning_hi = -2.0;
    h.step = 0.1;
    h.t_m = 50.0;
    h.engine = SweepEngine::classical;
    h.seed = 1;
    const HysteresisRecord a = hysteresis_sweep(base, h);
    h.seed = 2;
    const HysteresisRecord b = hysteresis_sweep(base, h);
    CHECK(a.jumps_found);
    CHECK(std::abs(a.detuning_width - w->width()) <= h.step);
    CHECK(a.detuning_width == b.detuning_width);
    CHECK(a.sweep.size() == 2 * 81);
  }

  TEST_CASE("decay fit recovers a synthetic exponential") {
    EnsembleStats s;
    for (int i = 0; i <= 300; ++i) {
      const double t = 0.5 * i;
      s.times.push_back(t);
      s.mean_q.push_back(-0.2 + 1.5 * std::exp(-t / 30.0));
      s.mean_p.push_back(1.1 - 0.8 * std::exp(-t / 30.0));
      s.mean_n.push_back(3.0);
      s.stderr_q.push_back(0.01);
      s.stderr_p.push_back(0.01);
      s.stderr_n.push_back(0.01);
    }
    s.n_traj = 100;
    const DecayFit f = fit_decay(s, 2.0, 1.5);
    REQUIRE(f.ok);
    CHECK(f.tau == doctest::Approx(30.0).epsilon(1e-6));
    CHECK(f.tau_kappa == doctest::Approx(45.0).epsilon(1e-6));
    CHECK(f.asymptote_q == doctest::Approx(-0.2).epsilon(1e-6));
    CHECK(f.asymptote_p == doctest::Approx(1.1).epsilon(1e-6));
    CHECK(f.t_start == 2.0);
    CHECK(f.amplitude_p == doctest::Approx(-0.8 * std::exp(-2.0 / 30.0)).epsilon(1e-6));
  }

  TEST_CASE("intermediate set is bistable with a short sweep") {
    CHECK(bistable(kMid));
    const BasinMap m = make_basin_map(kMid);
    CHECK(std::abs(m.upper_alpha - m.lower_alpha) > 1.0);
  }
}
