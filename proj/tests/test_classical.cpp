#include <doctest.h>

#include <cmath>
#include <random>

#include "kerrqsd/classical.hpp"

using namespace kerrqsd;

namespace {

const ModelParams kStrong{-5.0, -7.0, 0.05, 1.5};

// Independent oracle: sign changes of the cubic on a dense grid of n.
std::vector<double> scan_roots(const ModelParams& p) {
  const double k2 = p.kappa / 2.0;
  const double n_max = 4.0 * p.drive * p.drive / (k2 * k2);
  const int samples = 2'000'000;
  std::vector<double> roots;
  double prev = steady_cubic(0.0, p);
  for (int i = 1; i <= samples; ++i) {
    const double n = n_max * i / samples;
    const double f = steady_cubic(n, p);
    if ((prev < 0.0) != (f < 0.0)) roots.push_back(n);
    prev = f;
  }
  return roots;
}

}  // namespace

TEST_SUITE("classical") {
  TEST_CASE("mean-field right-hand side") {
    CHECK(std::abs(mean_field_rhs(0.0, {-2.0, 1.3, 0.4, 1.0}) - Complex(0.0, -1.3)) < 1e-15);
    const ModelParams lin{0.7, 0.0, 0.0, 1.5};
    CHECK(std::abs(mean_field_rhs(1.0, lin) - Complex(-0.75, -0.7)) < 1e-15);
    for (const SteadyBranch& b : steady_states(kStrong)) CHECK(std::abs(mean_field_rhs(b.alpha, kStrong)) < 1e-10);
  }

  TEST_CASE("linear oscillator has the Lorentzian root") {
    const ModelParams p{0.9, 1.1, 0.0, 1.2};
    const auto b = steady_states(p);
    REQUIRE(b.size() == 1);
    CHECK(b[0].excitation == doctest::Approx(1.21 / (0.36 + 0.81)).epsilon(1e-13));
    CHECK(b[0].stable);
  }

  TEST_CASE("three branches with an unstable middle one") {
    const auto b = steady_states(kStrong);
    REQUIRE(b.size() == 3);
    CHECK(b[0].stable);
    CHECK_FALSE(b[1].stable);
    CHECK(b[2].stable);
    CHECK(b[0].excitation < b[1].excitation);
    CHECK(b[1].excitation < b[2].excitation);
  }

  TEST_CASE("roots agree with a dense sign-change scan") {
    for (double dw : {-5.0, -8.0, -3.5, 1.0}) {
      ModelParams p = kStrong;
      p.detuning = dw;
      const auto branches = steady_states(p);
      const auto scanned = scan_roots(p);
      REQUIRE(branches.size() == scanned.size());
      const double grid = 4.0 * p.drive * p.drive / (p.kappa * p.kappa / 4.0) / 2'000'000;
      for (std::size_t i = 0; i < branches.size(); ++i) {
        CHECK(std::abs(branches[i].excitation - scanned[i]) <= grid);
        CHECK(std::abs(steady_cubic(branches[i].excitation, p)) < 1e-9 * p.drive * p.drive);
      }
    }
  }

  TEST_CASE("bistability classifier") {
    CHECK(bistable(kStrong));
    ModelParams pos = kStrong;
    pos.detuning = 5.0;
    CHECK_FALSE(bistable(pos));
    ModelParams zero_chi = kStrong;
    zero_chi.chi = 0.0;
    CHECK_THROWS_AS(bistable(zero_chi), std::invalid_argument);
  }

  TEST_CASE("classifier agrees with root counting on a grid") {
    long agree = 0, total = 0;
    for (int i = 0; i < 40; ++i) {
      for (int j = 0; j < 40; ++j) {
        ModelParams p = kStrong;
        p.detuning = -12.0 + 14.0 * (i + 0.5) / 40;
        p.drive = -12.0 + 11.9 * (j + 0.5) / 40;
        const BistabilityMargins m = bistability_margins(p);
        if (std::min({std::abs(m.orientation), std::abs(m.detuning), std::abs(m.drive)}) < 1e-6) continue;
        ++total;
        agree += bistable(p) == (steady_states(p).size() == 3);
      }
    }
    CHECK(total > 1500);
    CHECK(agree == total);
  }

  TEST_CASE("reduced coordinates") {
    const ReducedCoords xy = reduced_coords(kStrong);
    CHECK(xy.x == doctest::Approx(0.75 / -4.95).epsilon(1e-13));
    CHECK(xy.y == doctest::Approx(0.421875 / (49.0 * 0.05)).epsilon(1e-13));
    CHECK(xy.x == doctest::Approx(-0.151515).epsilon(1e-5));
    CHECK(xy.y == doctest::Approx(0.172194).epsilon(1e-5));
    CHECK(bistable(xy) == bistable(kStrong));
  }

  TEST_CASE("verdict depends only on reduced coordinates") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.2, 3.0), dw(-10.0, 2.0), beta(-8.0, 8.0);
    int checked = 0;
    for (int k = 0; k < 500; ++k) {
      const ModelParams p{dw(rng), beta(rng), 0.05 * u(rng), u(rng)};
      // Scale kappa by s and chi, dw + chi along so that x and y are unchanged.
      const double s = u(rng);
      ModelParams q = p;
      q.kappa = s * p.kappa;
      q.chi = s * p.chi;
      q.detuning = s * (p.detuning + p.chi) - q.chi;
      q.drive = p.drive * s;
      const ReducedCoords a = reduced_coords(p), b = reduced_coords(q);
      REQUIRE(a.x == doctest::Approx(b.x).epsilon(1e-12));
      REQUIRE(a.y == doctest::Approx(b.y).epsilon(1e-12));
      const BistabilityMargins m = bistability_margins(p);
      if (std::min({std::abs(m.orientation), std::abs(m.detuning), std::abs(m.drive)}) < 1e-6) continue;
      CHECK(bistable(p) == bistable(q));
      ++checked;
    }
    CHECK(checked > 400);
  }

  TEST_CASE("bistable window contains the strong-drive detuning") {
    const auto w = bistable_window(kStrong, -20.0, 5.0);
    REQUIRE(w);
    CHECK(w->lower < -5.0);
    CHECK(w->upper > -5.0);
    ModelParams inside = kStrong;
    inside.detuning = 0.5 * (w->lower + w->upper);
    CHECK(steady_states(inside).size() == 3);
    inside.detuning = w->lower - 1e-3;
    CHECK(steady_states(inside).size() == 1);
  }

  TEST_CASE("domain slice") {
    CHECK_FALSE(domain_slice(0.1));
    CHECK_FALSE(domain_slice(-0.7));
    const auto s = domain_slice(reduced_coords(kStrong).x);
    REQUIRE(s);
    CHECK(s->y_lower < s->y_upper);
    const double y = reduced_coords(kStrong).y;
    CHECK((y > s->y_lower && y < s->y_upper));
  }

  TEST_CASE("mean-field integration settles on a stable branch") {
    const auto b = steady_states(kStrong);
    const Complex end = integrate_mean_field(b[0].alpha + Complex(0.3, -0.2), kStrong, 30.0, 0.01);
    CHECK(std::abs(end - b[0].alpha) < 1e-6);
  }
}
