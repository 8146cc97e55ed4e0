#include "kerrqsd/ensemble.hpp"

#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <omp.h>

namespace kerrqsd {

WelfordGrid::WelfordGrid(std::size_t points) : mean_(points, 0.0), m2_(points, 0.0) {}

void WelfordGrid::add(const std::vector<double>& values) {
  if (values.size() != mean_.size()) throw std::invalid_argument("WelfordGrid: grid size mismatch");
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double delta = values[i] - mean_[i];
    mean_[i] += delta / n;
    m2_[i] += delta * (values[i] - mean_[i]);
  }
}

double WelfordGrid::standard_error(std::size_t i) const {
  if (count_ < 2) return 0.0;
  const double n = static_cast<double>(count_);
  return std::sqrt(m2_.at(i) / (n - 1.0) / n);
}

namespace {

struct Slot {
  std::optional<TrajectoryRecord> record;
  std::optional<StateVector> final_state;
  std::string error;
};

Slot run_one(const DisplacedState& psi0, const ModelParams& params, const EnsembleOptions& o, std::size_t index) {
  Slot slot;
  try {
    TrajectoryOptions t = o.trajectory;
    t.seed = derive_seed(o.master_seed, index);
    if (o.engine == Engine::fixed) {
      FixedRun r = evolve_fixed(to_fixed_basis(psi0, psi0.local.dim()), params, t);
      if (o.final_state_dim > 0) {
        DisplacedState ds{Complex{}, r.final_state};
        slot.final_state = to_fixed_basis(ds, FockDim(o.final_state_dim));
      }
      slot.record = std::move(r.record);
    } else {
      MqsdRun r = evolve_mqsd(psi0, params, t);
      if (o.final_state_dim > 0) slot.final_state = to_fixed_basis(r.final_state, FockDim(o.final_state_dim));
      slot.record = std::move(r.record);
    }
  } catch (const std::exception& e) {
    slot.error = e.what();
  }
  return slot;
}

struct Reducer {
  const EnsembleOptions& opts;
  WelfordGrid q, p, n;
  std::vector<double> times;
  EnsembleResult result;

  explicit Reducer(const EnsembleOptions& o) : opts(o) {}

  void merge(std::size_t index, Slot& slot) {
    if (!slot.error.empty()) {
      std::ostringstream os;
      os << "ensemble: trajectory " << index << " (seed " << derive_seed(opts.master_seed, index)
         << ") failed: " << slot.error;
      throw std::runtime_error(os.str());
    }
    TrajectoryRecord& rec = *slot.record;
    if (times.empty()) {
      times = rec.times;
      q = WelfordGrid(times.size());
      p = WelfordGrid(times.size());
      n = WelfordGrid(times.size());
    }
    q.add(rec.q);
    p.add(rec.p);
    n.add(rec.excitation);
    if (slot.final_state) result.final_states.push_back(std::move(*slot.final_state));
    if (opts.keep_records) result.records.push_back(std::move(rec));
  }

  EnsembleResult finish() {
    EnsembleStats& s = result.stats;
    s.times = times;
    s.n_traj = q.count();
    for (std::size_t i = 0; i < times.size(); ++i) {
      s.mean_q.push_back(q.mean(i));
      s.mean_p.push_back(p.mean(i));
      s.mean_n.push_back(n.mean(i));
      s.stderr_q.push_back(q.standard_error(i));
      s.stderr_p.push_back(p.standard_error(i));
      s.stderr_n.push_back(n.standard_error(i));
    }
    return std::move(result);
  }
};

void check_options(const EnsembleOptions& o) {
  if (o.n_traj < 2) throw std::invalid_argument("ensemble: n_traj must be >= 2");
}

}  // namespace

EnsembleResult run_ensemble(const DisplacedState& psi0, const ModelParams& params, const EnsembleOptions& options) {
  check_options(options);
  Reducer reducer(options);
  const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();
  // blocks bound memory to O(block * grid) while keeping the merge in index order
  const std::size_t block = static_cast<std::size_t>(std::max(1, workers)) * 8;
  std::vector<Slot> slots;
  for (std::size_t start = 0; start < options.n_traj; start += block) {
    const std::size_t count = std::min(block, options.n_traj - start);
    slots.assign(count, Slot{});
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long i = 0; i < static_cast<long>(count); ++i) {
      slots[static_cast<std::size_t>(i)] = run_one(psi0, params, options, start + static_cast<std::size_t>(i));
    }
    for (std::size_t i = 0; i < count; ++i) reducer.merge(start + i, slots[i]);
  }
  return reducer.finish();
}

EnsembleResult run_ensemble_serial(const DisplacedState& psi0, const ModelParams& params,
                                   const EnsembleOptions& options) {
  check_options(options);
  Reducer reducer(options);
  for (std::size_t i = 0; i < options.n_traj; ++i) {
    Slot slot = run_one(psi0, params, options, i);
    reducer.merge(i, slot);
  }
  return reducer.finish();
}

DensityMatrix density_from_ensemble(const std::vector<StateVector>& states) {
  if (states.empty()) throw std::invalid_argument("density_from_ensemble: no states");
  const Index d = states.front().dim().value();
  CMatrix rho = CMatrix::Zero(d, d);
  for (const StateVector& s : states) {
    if (s.dim().value() != d) throw std::invalid_argument("density_from_ensemble: states live in different bases");
    const CVector& v = s.amplitudes();
    rho.noalias() += v * v.adjoint();
  }
  rho /= static_cast<double>(states.size());
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix::from_matrix(std::move(rho), 1e-10);
}

}  // namespace kerrqsd
