#include "kerrqsd/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kerrqsd {

namespace {

// 2x2 real Jacobian of the mean-field flow in (Re alpha, Im alpha).
std::array<Complex, 2> jacobian_eigenvalues(Complex alpha, const ModelParams& p) {
  const double x = alpha.real();
  const double y = alpha.imag();
  const double n = std::norm(alpha);
  const double shift = p.detuning + p.chi;
  // d(|alpha|^2 alpha)/dx = 2x alpha + n, d/dy = 2y alpha + i n
  const Complex dfdx = -kI * (shift + 2.0 * p.chi * (2.0 * x * alpha + n)) - 0.5 * p.kappa;
  const Complex dfdy =
      -kI * (kI * shift + 2.0 * p.chi * (2.0 * y * alpha + kI * n)) - 0.5 * p.kappa * kI;
  const double j11 = dfdx.real(), j12 = dfdy.real();
  const double j21 = dfdx.imag(), j22 = dfdy.imag();
  const double half_trace = 0.5 * (j11 + j22);
  const double det = j11 * j22 - j12 * j21;
  const Complex root = std::sqrt(Complex(half_trace * half_trace - det, 0.0));
  return {half_trace - root, half_trace + root};
}

SteadyBranch make_branch(double n, const ModelParams& p) {
  SteadyBranch b;
  b.excitation = n;
  if (p.drive != 0.0) {
    const double e = p.detuning + p.chi + 2.0 * p.chi * n;
    b.alpha = Complex(-n * e / p.drive, -n * p.kappa / (2.0 * p.drive));
  }
  b.excitation = std::norm(b.alpha);
  b.jacobian_eigen = jacobian_eigenvalues(b.alpha, p);
  const double max_re = std::max(b.jacobian_eigen[0].real(), b.jacobian_eigen[1].real());
  b.stable = max_re < -1e-10;
  return b;
}

double cubic_derivative(double n, const ModelParams& p) {
  const double e = p.detuning + p.chi + 2.0 * p.chi * n;
  return 0.25 * p.kappa * p.kappa + e * e + 4.0 * p.chi * n * e;
}

double newton_polish(double n, const ModelParams& p) {
  for (int it = 0; it < 50; ++it) {
    const double f = steady_cubic(n, p);
    const double df = cubic_derivative(n, p);
    if (df == 0.0) break;
    const double step = f / df;
    n -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(n))) break;
  }
  return n;
}

double bisect(double lo, double hi, const ModelParams& p) {
  double flo = steady_cubic(lo, p);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = steady_cubic(mid, p);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Robust route: bracket roots between the critical points of the cubic.
std::vector<SteadyBranch> bracketed_roots(const ModelParams& p) {
  const double shift = p.detuning + p.chi;
  const double n_max = p.drive * p.drive / (0.25 * p.kappa * p.kappa);
  const double scale = p.drive * p.drive;
  // f'(n) = 12 chi^2 n^2 + 8 chi shift n + (kappa^2/4 + shift^2)
  const double qa = 12.0 * p.chi * p.chi;
  const double qb = 8.0 * p.chi * shift;
  const double qc = 0.25 * p.kappa * p.kappa + shift * shift;
  std::vector<double> nodes{0.0};
  const double qd = qb * qb - 4.0 * qa * qc;
  std::vector<double> crit;
  if (qd > 0.0) {
    const double s = std::sqrt(qd);
    for (double c : {(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)}) {
      if (c > 0.0 && c < n_max) crit.push_back(c);
    }
  }
  for (double c : crit) nodes.push_back(c);
  nodes.push_back(n_max);

  std::vector<SteadyBranch> out;
  for (double c : crit) {
    if (std::abs(steady_cubic(c, p)) <= 1e-12 * scale) {
      SteadyBranch b = make_branch(c, p);
      b.degenerate = true;
      out.push_back(b);
      out.push_back(b);
    }
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double f0 = steady_cubic(nodes[i], p);
    const double f1 = steady_cubic(nodes[i + 1], p);
    if (std::abs(f0) <= 1e-12 * scale || std::abs(f1) <= 1e-12 * scale) continue;
    if ((f0 < 0.0) != (f1 < 0.0)) out.push_back(make_branch(bisect(nodes[i], nodes[i + 1], p), p));
  }
  std::sort(out.begin(), out.end(),
            [](const SteadyBranch& a, const SteadyBranch& b) { return a.excitation < b.excitation; });
  return out;
}

}  // namespace

Complex mean_field_rhs(Complex alpha, const ModelParams& p) {
  return -kI * (p.drive + (p.detuning + p.chi) * alpha + 2.0 * p.chi * std::norm(alpha) * alpha) -
         0.5 * p.kappa * alpha;
}

double steady_cubic(double n, const ModelParams& p) {
  const double e = p.detuning + p.chi + 2.0 * p.chi * n;
  return n * (0.25 * p.kappa * p.kappa + e * e) - p.drive * p.drive;
}

std::vector<SteadyBranch> steady_states(const ModelParams& params) {
  params.validate();
  const ModelParams& p = params;
  if (p.drive == 0.0) return {make_branch(0.0, p)};
  const double shift = p.detuning + p.chi;
  if (p.chi == 0.0) {
    return {make_branch(p.drive * p.drive / (0.25 * p.kappa * p.kappa + shift * shift), p)};
  }

  // monic cubic n^3 + b n^2 + c n + d
  const double lead = 4.0 * p.chi * p.chi;
  const double b = 4.0 * p.chi * shift / lead;
  const double c = (0.25 * p.kappa * p.kappa + shift * shift) / lead;
  const double d = -p.drive * p.drive / lead;
  // depressed t^3 + pp t + qq with n = t - b/3
  const double pp = c - b * b / 3.0;
  const double qq = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = 0.25 * qq * qq + pp * pp * pp / 27.0;
  const double disc_scale = std::max(0.25 * qq * qq, std::abs(pp * pp * pp) / 27.0);
  if (disc_scale == 0.0 || std::abs(disc) <= 1e-12 * disc_scale) return bracketed_roots(p);

  std::vector<double> roots;
  if (disc < 0.0) {
    const double r = 2.0 * std::sqrt(-pp / 3.0);
    const double arg = std::clamp(1.5 * qq / pp * std::sqrt(-3.0 / pp), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - b / 3.0);
    }
  } else {
    const double s = std::sqrt(disc);
    roots.push_back(std::cbrt(-0.5 * qq + s) + std::cbrt(-0.5 * qq - s) - b / 3.0);
  }

  std::vector<SteadyBranch> out;
  for (double n : roots) {
    n = newton_polish(n, p);
    if (n < 0.0) continue;
    out.push_back(make_branch(n, p));
  }
  std::sort(out.begin(), out.end(),
            [](const SteadyBranch& x, const SteadyBranch& y) { return x.excitation < y.excitation; });
  // Newton can merge two nearby roots; hand such cases to the bracketing route
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (std::abs(out[i + 1].excitation - out[i].excitation) <=
        1e-9 * std::max(1.0, out[i].excitation)) {
      return bracketed_roots(p);
    }
  }
  return out;
}

BistabilityMargins bistability_margins(const ModelParams& params) {
  params.validate();
  if (params.chi <= 0.0) throw std::invalid_argument("bistable: requires chi > 0");
  const double shift = params.detuning + params.chi;
  if (shift == 0.0) return {0.0, -std::sqrt(3.0), -1.0};
  const double half_k = 0.5 * params.kappa;
  const double ratio = half_k / shift;
  const double lhs_inner = 27.0 * params.chi * params.drive * params.drive / (shift * shift * shift) +
                           1.0 + 9.0 * ratio * ratio;
  const double rhs_inner = 1.0 - 3.0 * ratio * ratio;
  BistabilityMargins m{};
  m.orientation = -params.chi * shift;
  m.detuning = std::abs(shift / half_k) - std::sqrt(3.0);
  m.drive = rhs_inner * rhs_inner * rhs_inner - lhs_inner * lhs_inner;
  return m;
}

bool bistable(const ModelParams& params) {
  const BistabilityMargins m = bistability_margins(params);
  return m.orientation > 0.0 && m.detuning > 0.0 && m.drive > 0.0;
}

ReducedCoords reduced_coords(const ModelParams& params) {
  params.validate();
  const double shift = params.detuning + params.chi;
  if (params.chi <= 0.0) throw std::invalid_argument("reduced_coords: requires chi > 0");
  if (shift == 0.0) throw std::invalid_argument("reduced_coords: dw + chi must be nonzero");
  if (params.drive == 0.0) throw std::invalid_argument("reduced_coords: drive must be nonzero");
  const double half_k = 0.5 * params.kappa;
  return {half_k / shift, half_k * half_k * half_k / (params.drive * params.drive * params.chi)};
}

bool bistable(ReducedCoords xy) {
  const double x = xy.x;
  if (!(x < 0.0) || !(xy.y > 0.0)) return false;
  if (!(1.0 / std::abs(x) > std::sqrt(3.0))) return false;
  const double lhs = 27.0 * x * x * x / xy.y + 1.0 + 9.0 * x * x;
  const double rhs = 1.0 - 3.0 * x * x;
  return lhs * lhs < rhs * rhs * rhs;
}

std::optional<DomainSlice> domain_slice(double x) {
  if (!(x < 0.0) || 3.0 * x * x >= 1.0) return std::nullopt;
  const double s = std::pow(1.0 - 3.0 * x * x, 1.5);
  const double base = 1.0 + 9.0 * x * x;
  const double num = 27.0 * x * x * x;
  return DomainSlice{num / (-s - base), num / (s - base)};
}

std::optional<DetuningWindow> bistable_window(const ModelParams& base, double lo, double hi,
                                              double tol) {
  if (!(hi > lo)) throw std::invalid_argument("bistable_window: need hi > lo");
  auto at = [&](double dw) {
    ModelParams p = base;
    p.detuning = dw;
    return bistable(p);
  };
  constexpr int kScan = 4000;
  const double h = (hi - lo) / kScan;
  int first = -1, last = -1;
  for (int i = 0; i <= kScan; ++i) {
    if (at(lo + i * h)) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return std::nullopt;
  auto refine = [&](double inside, double outside) {
    while (std::abs(outside - inside) > tol) {
      const double mid = 0.5 * (inside + outside);
      (at(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  const double lower = first == 0 ? lo : refine(lo + first * h, lo + (first - 1) * h);
  const double upper = last == kScan ? hi : refine(lo + last * h, lo + (last + 1) * h);
  return DetuningWindow{lower, upper};
}

Complex integrate_mean_field(Complex alpha, const ModelParams& params, double duration, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_mean_field: dt must be > 0");
  const auto steps = static_cast<long>(std::ceil(duration / dt - 1e-12));
  const double h = steps > 0 ? duration / static_cast<double>(steps) : 0.0;
  for (long s = 0; s < steps; ++s) {
    const Complex k1 = mean_field_rhs(alpha, params);
    const Complex k2 = mean_field_rhs(alpha + 0.5 * h * k1, params);
    const Complex k3 = mean_field_rhs(alpha + 0.5 * h * k2, params);
    const Complex k4 = mean_field_rhs(alpha + h * k3, params);
    alpha += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return alpha;
}

}  // namespace kerrqsd
