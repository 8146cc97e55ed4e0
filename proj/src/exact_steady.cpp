#include "kerrqsd/exact_steady.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kerrqsd {

namespace {

constexpr long kMaxTerms = 1'000'000;
constexpr int kRescaleBits = 512;

bool is_pole(Complex c) {
  const double r = std::round(c.real());
  return r <= 0.0 && std::abs(c.real() - r) < 1e-14 && std::abs(c.imag()) < 1e-14;
}

// Neumaier compensated sum, one lane per real component.
struct CompensatedSum {
  double re = 0.0, im = 0.0, re_c = 0.0, im_c = 0.0;

  static void add_lane(double& s, double& comp, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      comp += (s - t) + x;
    } else {
      comp += (x - t) + s;
    }
    s = t;
  }
  void add(Complex x) {
    add_lane(re, re_c, x.real());
    add_lane(im, im_c, x.imag());
  }
  Complex value() const { return {re + re_c, im + im_c}; }
  void scale(double f) {
    re *= f;
    im *= f;
    re_c *= f;
    im_c *= f;
  }
};

}  // namespace

Complex ScaledComplex::value() const {
  return {std::ldexp(mantissa.real(), static_cast<int>(exponent)),
          std::ldexp(mantissa.imag(), static_cast<int>(exponent))};
}

HyperParams hyper_params(const ModelParams& params) {
  params.validate();
  if (params.chi <= 0.0) {
    throw std::invalid_argument("exact steady state requires chi > 0 (use the classical module for chi = 0)");
  }
  const double ratio = params.drive / params.chi;
  return {Complex((params.detuning + params.chi) / params.chi, -params.kappa / (2.0 * params.chi)),
          2.0 * ratio * ratio};
}

ScaledComplex hyper0f2_scaled(Complex c, Complex d, Complex z) {
  if (is_pole(c) || is_pole(d)) throw std::domain_error("hyper0f2: parameter at a Pochhammer pole");
  // past this index every term ratio shrinks monotonically
  const double settle = std::max({0.0, -c.real(), -d.real()}) + 2.0;

  CompensatedSum sum;
  sum.add(1.0);
  Complex term = 1.0;
  long exponent = 0;
  int small_run = 0;
  for (long k = 0; k < kMaxTerms; ++k) {
    const double kk = static_cast<double>(k);
    const Complex ratio = z / ((kk + 1.0) * (c + kk) * (d + kk));
    term *= ratio;
    sum.add(term);

    const double mag = std::abs(sum.value());
    if (mag > std::ldexp(1.0, kRescaleBits)) {
      const double f = std::ldexp(1.0, -kRescaleBits);
      sum.scale(f);
      term *= f;
      exponent += kRescaleBits;
    }
    if (std::abs(term) <= 1e-16 * std::abs(sum.value())) {
      ++small_run;
    } else {
      small_run = 0;
    }
    if (small_run >= 3 && kk >= settle && std::abs(ratio) < 0.5) {
      return {sum.value(), exponent};
    }
  }
  throw std::runtime_error("hyper0f2: no convergence within 1e6 terms");
}

Complex hyper0f2(Complex c, Complex d, Complex z) { return hyper0f2_scaled(c, d, z).value(); }

namespace {

Complex series_ratio(const ScaledComplex& num, const ScaledComplex& den) {
  const Complex r = num.mantissa / den.mantissa;
  const long shift = num.exponent - den.exponent;
  return {std::ldexp(r.real(), static_cast<int>(shift)), std::ldexp(r.imag(), static_cast<int>(shift))};
}

}  // namespace

Complex steady_moment(int n, int m, const ModelParams& params) {
  if (n < 0 || m < 0 || n > 32 || m > 32) {
    throw std::invalid_argument("steady_moment: orders must lie in 0..32");
  }
  const HyperParams hp = hyper_params(params);
  const Complex c = hp.c;
  const Complex cc = std::conj(c);
  if (n == 0 && m == 0) return 1.0;

  // (-beta/chi)^(n+m) / ((c)_m (c*)_n), accumulated factor by factor
  const double lever = -params.drive / params.chi;
  Complex prefactor = 1.0;
  for (int k = 0; k < m; ++k) prefactor *= lever / (c + static_cast<double>(k));
  for (int k = 0; k < n; ++k) prefactor *= lever / (cc + static_cast<double>(k));
  if (prefactor == Complex{}) return 0.0;

  const ScaledComplex den = hyper0f2_scaled(c, cc, hp.z);
  const ScaledComplex num =
      hyper0f2_scaled(c + static_cast<double>(m), cc + static_cast<double>(n), hp.z);
  return prefactor * series_ratio(num, den);
}

double mean_excitation(const ModelParams& params) {
  const HyperParams hp = hyper_params(params);
  const double shift = params.detuning + params.chi;
  const double lorentz =
      params.drive * params.drive / (shift * shift + 0.25 * params.kappa * params.kappa);
  if (lorentz == 0.0) return 0.0;
  const Complex c = hp.c;
  const ScaledComplex den = hyper0f2_scaled(c, std::conj(c), hp.z);
  const ScaledComplex num = hyper0f2_scaled(c + 1.0, std::conj(c) + 1.0, hp.z);
  return lorentz * series_ratio(num, den).real();
}

}  // namespace kerrqsd
