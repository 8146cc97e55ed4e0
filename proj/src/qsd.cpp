#include "kerrqsd/qsd.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kerrqsd/errors.hpp"

namespace kerrqsd {

namespace {

constexpr double kNormDriftLimit = 0.1;

struct LocalMoments {
  Complex a;
  Complex a2;
  double ada;
  Complex ada2;
};

LocalMoments local_moments(const CVector& v, const CVector& sqrt_n) {
  const Index d = v.size();
  LocalMoments m{};
  for (Index n = 1; n < d; ++n) {
    const Complex c = std::conj(v[n - 1]) * v[n];
    m.a += c * sqrt_n[n].real();
    m.ada += static_cast<double>(n) * std::norm(v[n]);
  }
  for (Index n = 2; n < d; ++n) {
    const Complex c = std::conj(v[n - 2]) * v[n];
    m.a2 += c * (sqrt_n[n].real() * sqrt_n[n - 1].real());
    // <a^dag a^2> = sum (n-1) sqrt(n) conj(v[n-1]) v[n]
    m.ada2 += std::conj(v[n - 1]) * v[n] * (static_cast<double>(n - 1) * sqrt_n[n].real());
  }
  return m;
}

Complex local_mean(const CVector& v, const CVector& sqrt_n) {
  Complex a{};
  for (Index n = 1; n < v.size(); ++n) a += std::conj(v[n - 1]) * v[n] * sqrt_n[n].real();
  return a;
}

Moments to_physical(const LocalMoments& l, Complex base) {
  const Complex b = base;
  const Complex bc = std::conj(b);
  const double b2 = std::norm(b);
  Moments m{};
  m.a = b + l.a;
  m.a2 = l.a2 + 2.0 * b * l.a + b * b;
  m.ada = l.ada + 2.0 * (bc * l.a).real() + b2;
  m.ada2 = l.ada2 + 2.0 * b * l.ada + b * b * std::conj(l.a) + bc * l.a2 + 2.0 * b2 * l.a + b2 * b;
  return m;
}

// -i H~ - (kappa/2) N~ for N~ = (a~^dag + alpha^*)(a~ + alpha), truncated at dim.
BandOperator frame_generator(const ModelParams& p, Index dim, Complex alpha) {
  BandOperator num(dim);
  for (Index k = 0; k < dim; ++k) num.at(k, k) = static_cast<double>(k) + std::norm(alpha);
  for (Index k = 1; k < dim; ++k) {
    const double s = std::sqrt(static_cast<double>(k));
    num.at(k - 1, k) = std::conj(alpha) * s;
    num.at(k, k - 1) = alpha * s;
  }
  BandOperator gen(dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = std::max<Index>(0, i - 2); j <= std::min<Index>(dim - 1, i + 2); ++j) {
      Complex n2{};
      for (Index k = std::max<Index>(0, std::max(i, j) - 1); k <= std::min(dim - 1, std::min(i, j) + 1); ++k) {
        n2 += num.at(i, k) * num.at(k, j);
      }
      Complex h = p.chi * n2;
      const Complex n_ij = num.at(i, j);
      h += p.detuning * n_ij;
      if (j == i + 1) h += p.drive * std::sqrt(static_cast<double>(j));
      if (i == j + 1) h += p.drive * std::sqrt(static_cast<double>(i));
      if (i == j) h += p.drive * 2.0 * alpha.real();
      gen.at(i, j) = -kI * h - 0.5 * p.kappa * n_ij;
    }
  }
  return gen;
}

CVector embed(const CVector& v, Index dim) {
  if (dim < v.size()) throw std::invalid_argument("to_fixed_basis: target basis smaller than the local basis");
  CVector out = CVector::Zero(dim);
  out.head(v.size()) = v;
  return out;
}

void check_norm(double norm, double t) {
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kNormDriftLimit) {
    std::ostringstream os;
    os << "qsd: state norm drifted to " << norm << " within one step at t = " << t
       << " (reduce dt or enlarge the basis)";
    throw NumericalError(os.str());
  }
}

}  // namespace

Observables observables_from(const Moments& m) {
  const Complex da2 = m.a2 - m.a * m.a;
  const double dada = m.ada - std::norm(m.a);
  Observables o{};
  o.q = std::sqrt(2.0) * m.a.real();
  o.p = std::sqrt(2.0) * m.a.imag();
  o.var_q = std::max(0.0, dada + da2.real() + 0.5);
  o.var_p = std::max(0.0, dada - da2.real() + 0.5);
  o.excitation = m.ada;
  return o;
}

void TrajectoryRecord::push(double t, const Observables& obs) {
  times.push_back(t);
  q.push_back(obs.q);
  p.push_back(obs.p);
  var_q.push_back(obs.var_q);
  var_p.push_back(obs.var_p);
  excitation.push_back(obs.excitation);
  basin.push_back(Basin::unclassified);
}

DisplacedState displaced_vacuum(Complex alpha, FockDim local_dim) {
  return {alpha, StateVector::fock(0, local_dim)};
}

StateVector to_fixed_basis(const DisplacedState& state, FockDim dim) {
  CVector v = embed(state.local.amplitudes(), dim.value());
  if (state.base != Complex{}) v = displace_vector(state.base, v);
  return StateVector::from_amplitudes(std::move(v));
}

double euler_dt_bound(const ModelParams& params, double n_max) {
  if (!(n_max >= 1.0)) throw std::invalid_argument("euler_dt_bound: n_max must be >= 1");
  const double rate = std::max({params.kappa * n_max, std::abs(params.detuning) * n_max,
                                params.chi * n_max * n_max});
  return 0.01 / rate;
}

StateVector qsd_step(const StateVector& psi, const ModelParams& params, double dt, Complex dxi) {
  params.validate();
  const FockDim dim = psi.dim();
  const CMatrix h = hamiltonian(params, dim).matrix();
  const CMatrix l = lindblad(params, dim).matrix();
  const CVector& v = psi.amplitudes();
  const CVector lv = l * v;
  const Complex mean_l = v.dot(lv);
  const CVector ldl_v = l.adjoint() * lv;
  const CVector drift =
      -kI * (h * v) - 0.5 * (ldl_v + std::norm(mean_l) * v - 2.0 * std::conj(mean_l) * lv);
  const CVector next = v + dt * drift + dxi * (lv - mean_l * v);
  check_norm(next.norm(), 0.0);
  return StateVector::from_amplitudes(next);
}

QsdIntegrator::QsdIntegrator(const ModelParams& params, const DisplacedState& initial, Engine engine,
                             const TrajectoryOptions& options)
    : params_(params),
      engine_(engine),
      opts_(options),
      dim_(initial.local.dim().value()),
      base_(engine == Engine::mqsd ? initial.base : Complex{}),
      generator_(dim_),
      drift_(dim_) {
  params_.validate();
  if (!(opts_.dt > 0.0)) throw std::invalid_argument("trajectory: dt must be positive");
  if (engine == Engine::mqsd) {
    psi_ = initial.local.amplitudes();
  } else {
    psi_ = to_fixed_basis(initial, initial.local.dim()).amplitudes();
  }
  sqrt_n_.resize(dim_);
  for (Index n = 0; n < dim_; ++n) sqrt_n_[n] = std::sqrt(static_cast<double>(n));
  work_a_.resize(dim_);
  noise_vec_.resize(dim_);
  rebuild_frame();
  if (engine_ == Engine::mqsd) recenter_if_needed();
}

void QsdIntegrator::set_params(const ModelParams& params) {
  params.validate();
  params_ = params;
  rebuild_frame();
}

void QsdIntegrator::rebuild_frame() {
  generator_ = frame_generator(params_, dim_, base_);
  drift_ = generator_;
}

void QsdIntegrator::recenter_if_needed() {
  const Complex shift = local_mean(psi_, sqrt_n_);
  if (std::abs(shift) <= opts_.recenter_threshold) return;
  psi_ = displace_vector(-shift, psi_);
  psi_ /= psi_.norm();
  base_ += shift;
  ++recenterings_;
  rebuild_frame();
}

void QsdIntegrator::check_truncation() const {
  const double top = std::norm(psi_[dim_ - 1]) + std::norm(psi_[dim_ - 2]);
  if (top > opts_.truncation_tolerance) {
    std::ostringstream os;
    os << "qsd: top two basis populations reached " << top << " at t = " << time_ << " (basis dim "
       << dim_ << "); enlarge the basis";
    throw TruncationError(os.str());
  }
}

void QsdIntegrator::step(Complex dxi, const StepSink* sink) {
  Moments before{};
  if (sink != nullptr && *sink) before = moments();
  const double dt = opts_.dt;
  const double kappa = params_.kappa;
  const Complex la = local_mean(psi_, sqrt_n_);
  const Complex mean_a = base_ + la;

  // A = G + kappa <a>^* (a~ + alpha) - kappa |<a>|^2 / 2
  const Complex coef = kappa * std::conj(mean_a);
  const Complex c0 = coef * base_ - 0.5 * kappa * std::norm(mean_a);
  {
    const CVector& g0 = generator_.diagonal(0);
    const CVector& g1 = generator_.diagonal(1);
    CVector& d0 = drift_.diagonal(0);
    CVector& d1 = drift_.diagonal(1);
    for (Index i = 0; i < dim_; ++i) d0[i] = g0[i] + c0;
    for (Index i = 0; i + 1 < dim_; ++i) d1[i] = g1[i] + coef * sqrt_n_[i + 1].real();
  }

  // noise direction sqrt(kappa) (a~ - <a~>) psi
  const double sk = std::sqrt(kappa);
  for (Index n = 0; n + 1 < dim_; ++n) noise_vec_[n] = sk * (sqrt_n_[n + 1].real() * psi_[n + 1] - la * psi_[n]);
  noise_vec_[dim_ - 1] = -sk * la * psi_[dim_ - 1];

  if (opts_.scheme == Scheme::euler) {
    drift_.apply(std::span<const Complex>(psi_.data(), static_cast<std::size_t>(dim_)),
                 std::span<Complex>(work_a_.data(), static_cast<std::size_t>(dim_)));
    psi_ += dt * work_a_ + dxi * noise_vec_;
  } else {
    psi_ = expm_action(drift_, psi_, dt);
    psi_ += dxi * noise_vec_;
  }
  const double norm = psi_.norm();
  check_norm(norm, time_);
  psi_ /= norm;
  time_ += dt;

  if (engine_ == Engine::mqsd) recenter_if_needed();
  check_truncation();

  if (sink != nullptr && *sink) {
    const Complex after = base_ + local_mean(psi_, sqrt_n_);
    (*sink)(StepSample{dt, dxi, before, after});
  }
}

void QsdIntegrator::advance(long count, NoiseStream& noise, const StepSink* sink) {
  for (long s = 0; s < count; ++s) step(wiener_increment(noise, opts_.dt), sink);
}

Moments QsdIntegrator::moments() const { return to_physical(local_moments(psi_, sqrt_n_), base_); }

DisplacedState QsdIntegrator::state() const {
  return {base_, StateVector::from_amplitudes(psi_)};
}

namespace {

long step_count(const TrajectoryOptions& o) {
  if (!(o.dt > 0.0) || !(o.t_final >= 0.0) || !std::isfinite(o.t_final)) {
    throw std::invalid_argument("trajectory: need dt > 0 and finite t_final >= 0");
  }
  if (o.record_stride < 1) throw std::invalid_argument("trajectory: record_stride must be >= 1");
  return std::lround(o.t_final / o.dt);
}

TrajectoryRecord run(QsdIntegrator& integ, const TrajectoryOptions& o, const StepSink* sink) {
  const long steps = step_count(o);
  NoiseStream noise{o.seed, 0};
  TrajectoryRecord rec;
  rec.push(0.0, integ.observables());
  for (long s = 1; s <= steps; ++s) {
    integ.step(wiener_increment(noise, o.dt), sink);
    if (s % o.record_stride == 0) rec.push(static_cast<double>(s) * o.dt, integ.observables());
  }
  return rec;
}

}  // namespace

FixedRun evolve_fixed(const StateVector& psi0, const ModelParams& params, const TrajectoryOptions& options,
                      const StepSink* sink) {
  QsdIntegrator integ(params, DisplacedState{Complex{}, psi0}, Engine::fixed, options);
  TrajectoryRecord rec = run(integ, options, sink);
  return {std::move(rec), integ.state().local};
}

MqsdRun evolve_mqsd(const DisplacedState& psi0, const ModelParams& params, const TrajectoryOptions& options,
                    const StepSink* sink) {
  QsdIntegrator integ(params, psi0, Engine::mqsd, options);
  TrajectoryRecord rec = run(integ, options, sink);
  return {std::move(rec), integ.state(), integ.recenterings()};
}

MeanFieldCheck check_mean_field(const std::vector<StepSample>& samples, const ModelParams& params) {
  MeanFieldCheck out;
  double sum_raw = 0.0, sum_res = 0.0;
  const double sk = std::sqrt(params.kappa);
  for (const StepSample& s : samples) {
    const Moments& m = s.before;
    const Complex a = m.a;
    const Complex drift = -kI * ((params.detuning + params.chi) * a + params.drive + 2.0 * params.chi * m.ada2) -
                          0.5 * params.kappa * a;
    const Complex noise = sk * (m.a2 - a * a) * s.dxi + sk * (m.ada - std::norm(a)) * std::conj(s.dxi);
    const Complex raw = (s.a_after - a) - drift * s.dt - noise;
    const Complex c3 = m.ada2 - 2.0 * a * m.ada - std::conj(a) * m.a2 + 2.0 * std::norm(a) * a;
    const Complex corrected = raw - params.kappa * (std::norm(s.dxi) - s.dt) * c3;
    out.max_raw = std::max(out.max_raw, std::abs(raw));
    out.max_residual = std::max(out.max_residual, std::abs(corrected));
    sum_raw += std::norm(raw);
    sum_res += std::norm(corrected);
  }
  out.steps = samples.size();
  if (!samples.empty()) {
    out.rms_raw = std::sqrt(sum_raw / static_cast<double>(samples.size()));
    out.rms_residual = std::sqrt(sum_res / static_cast<double>(samples.size()));
  }
  return out;
}

}  // namespace kerrqsd
