#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "kerrqsd/classical.hpp"
#include "kerrqsd/config.hpp"
#include "kerrqsd/csv.hpp"
#include "kerrqsd/ensemble.hpp"
#include "kerrqsd/errors.hpp"
#include "kerrqsd/exact_steady.hpp"
#include "kerrqsd/experiments.hpp"
#include "kerrqsd/qsd.hpp"
#include "kerrqsd/validation.hpp"

using namespace kerrqsd;

namespace {

constexpr const char* kWorkersEnv = "KERRQSD_WORKERS";

struct CommandLine {
  std::string config_path;
  std::string output_path;
  std::map<std::string, std::string> flags;
};

int workers_from_env() {
  const char* v = std::getenv(kWorkersEnv);
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) {
    throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer, got '" + v + "'");
  }
  return static_cast<int>(n);
}

RunConfig load(const CommandLine& cl) {
  return cl.config_path.empty() ? parse_config("", cl.flags) : parse_config_file(cl.config_path, cl.flags);
}

// Output goes to a file when -o is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw std::runtime_error("write to output failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void begin(CsvWriter& csv, const std::string& command, const RunConfig& cfg) {
  csv.comment("kerrqsd " + command);
  csv.echo_config(cfg.entries());
}

double sqrt2() { return std::sqrt(2.0); }

const char* basin_name(Basin b) {
  switch (b) {
    case Basin::lower:
      return "lower";
    case Basin::upper:
      return "upper";
    case Basin::transit:
      return "transit";
    case Basin::unclassified:
      break;
  }
  return "unclassified";
}

Index basis_size(const RunConfig& cfg, Engine engine) {
  return engine == Engine::fixed ? cfg.integer("dim") : cfg.integer("local_dim");
}

TrajectoryOptions trajectory_options(const RunConfig& cfg) {
  TrajectoryOptions t;
  t.dt = cfg.real("dt");
  t.t_final = cfg.real("t_final");
  t.seed = cfg.seed_or("seed", 0);
  t.scheme = cfg.scheme();
  t.record_stride = cfg.integer("record_stride");
  t.recenter_threshold = cfg.real("recenter_threshold");
  return t;
}

void trajectory_defaults(RunConfig& cfg) {
  cfg.set_default("engine", "mqsd");
  cfg.set_default("scheme", "exponential");
  cfg.set_default("dim", "60");
  cfg.set_default("local_dim", "40");
  cfg.set_default("dt", "0.001");
  cfg.set_default("record_stride", "100");
  cfg.set_default("recenter_threshold", "0.1");
  cfg.set_default("seed", "1");
}

// Initial coherent amplitude: a stable classical branch, or (q0 + i p0)/sqrt 2.
Complex start_alpha(RunConfig& cfg, const ModelParams& p) {
  cfg.set_default("start", "coherent");
  const std::string start = cfg.word_or("start", "coherent");
  if (start == "coherent") {
    cfg.set_default("q0", "0");
    cfg.set_default("p0", "0");
    return Complex(cfg.real("q0"), cfg.real("p0")) / sqrt2();
  }
  if (start == "lower" || start == "upper") {
    const BasinMap basins = make_basin_map(p, cfg.real_or("radius_fraction", 0.35));
    return start == "lower" ? basins.lower_alpha : basins.upper_alpha;
  }
  throw ConfigError("config key 'start': expected coherent, lower or upper, got '" + start + "'");
}

DisplacedState initial_state(Complex alpha, Engine engine, Index size) {
  if (engine == Engine::mqsd) return displaced_vacuum(alpha, FockDim(size));
  return DisplacedState{Complex{}, coherent_state(alpha, FockDim(size)).state};
}

std::vector<double> grid(double lo, double hi, long points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (long i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

void ensemble_rows(CsvWriter& csv, const EnsembleStats& s, const DecayFit* fit = nullptr) {
  std::vector<std::string> cols = {"t", "mean_q", "stderr_q", "mean_p", "stderr_p", "mean_n", "stderr_n"};
  if (fit) {
    cols.push_back("fit_q");
    cols.push_back("fit_p");
  }
  csv.header(cols);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    std::vector<CsvWriter::Cell> row = {s.times[i],  s.mean_q[i],   s.stderr_q[i], s.mean_p[i],
                                        s.stderr_p[i], s.mean_n[i], s.stderr_n[i]};
    if (fit) {
      const double e = fit->ok ? std::exp(-(s.times[i] - fit->t_start) / fit->tau) : 0.0;
      row.push_back(fit->ok ? CsvWriter::Cell(fit->asymptote_q + fit->amplitude_q * e) : CsvWriter::Cell(""));
      row.push_back(fit->ok ? CsvWriter::Cell(fit->asymptote_p + fit->amplitude_p * e) : CsvWriter::Cell(""));
    }
    csv.row(row);
  }
}

int cmd_classical_sweep(const CommandLine& cl) {
  RunConfig cfg = load(cl);
  cfg.set_default("detuning_lo", "-10");
  cfg.set_default("detuning_hi", "2");
  cfg.set_default("points", "241");
  ModelParams p = cfg.params(false);
  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "classical-sweep", cfg);
  if (const auto w = bistable_window(p, cfg.real("detuning_lo"), cfg.real("detuning_hi"))) {
    csv.comment("bistable_lower = " + format_real(w->lower));
    csv.comment("bistable_upper = " + format_real(w->upper));
  }
  csv.header({"detuning", "n_branch1", "n_branch2", "n_branch3", "stable1", "stable2", "stable3"});
  for (double d : grid(cfg.real("detuning_lo"), cfg.real("detuning_hi"), cfg.integer("points"))) {
    p.detuning = d;
    const std::vector<SteadyBranch> b = steady_states(p);
    std::vector<CsvWriter::Cell> row = {d};
    for (std::size_t k = 0; k < 3; ++k) row.push_back(k < b.size() ? CsvWriter::Cell(b[k].excitation) : "");
    for (std::size_t k = 0; k < 3; ++k) row.push_back(k < b.size() ? CsvWriter::Cell(long{b[k].stable}) : "");
    csv.row(row);
  }
  out.finish();
  return 0;
}

int cmd_quantum_steady(const CommandLine& cl) {
  RunConfig cfg = load(cl);
  cfg.set_default("detuning_lo", "-10");
  cfg.set_default("detuning_hi", "2");
  cfg.set_default("points", "241");
  ModelParams p = cfg.params(false);
  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "quantum-steady", cfg);
  csv.header({"detuning", "mean_excitation", "q", "p"});
  for (double d : grid(cfg.real("detuning_lo"), cfg.real("detuning_hi"), cfg.integer("points"))) {
    p.detuning = d;
    const Complex a = steady_moment(0, 1, p);
    csv.row({d, mean_excitation(p), sqrt2() * a.real(), sqrt2() * a.imag()});
  }
  out.finish();
  return 0;
}

int cmd_domain_map(const CommandLine& cl) {
  RunConfig cfg = load(cl);
  cfg.set_default("points", "200");
  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "domain-map", cfg);
  if (cfg.has("drive") && cfg.has("chi") && cfg.has("kappa") && cfg.has("detuning")) {
    const ReducedCoords xy = reduced_coords(cfg.params());
    csv.comment("point_x = " + format_real(xy.x));
    csv.comment("point_y = " + format_real(xy.y));
    csv.comment(std::string("point_bistable = ") + (bistable(xy) ? "1" : "0"));
  }
  csv.header({"x", "y_lower", "y_upper"});
  // The bistable wedge lives in -1/sqrt 3 < x < 0; both ends are excluded.
  const long n = cfg.integer("points");
  const double x_min = -1.0 / std::sqrt(3.0);
  for (long i = 1; i <= n; ++i) {
    const double x = x_min * static_cast<double>(n + 1 - i) / static_cast<double>(n + 1);
    const auto slice = domain_slice(x);
    if (slice) {
      csv.row({x, slice->y_lower, slice->y_upper});
    } else {
      csv.row({x, "", ""});
    }
  }
  out.finish();
  return 0;
}

int cmd_trajectory(const CommandLine& cl) {
  RunConfig cfg = load(cl);
  trajectory_defaults(cfg);
  const ModelParams p = cfg.params();
  const Complex alpha = start_alpha(cfg, p);
  cfg.set_default("radius_fraction", "0.35");
  const Engine engine = cfg.engine();
  const TrajectoryOptions t = trajectory_options(cfg);
  const Index size = basis_size(cfg, engine);

  TrajectoryRecord record;
  long recenterings = 0;
  if (engine == Engine::fixed) {
    record = evolve_fixed(coherent_state(alpha, FockDim(size)).state, p, t).record;
  } else {
    MqsdRun run = evolve_mqsd(displaced_vacuum(alpha, FockDim(size)), p, t);
    record = std::move(run.record);
    recenterings = run.recenterings;
  }
  if (bistable(p)) classify_basin(record, make_basin_map(p, cfg.real("radius_fraction")));

  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "trajectory", cfg);
  csv.comment("recenterings = " + std::to_string(recenterings));
  csv.header({"t", "q", "p", "varQ", "varP", "n", "basin"});
  for (std::size_t i = 0; i < record.size(); ++i) {
    csv.row({record.times[i], record.q[i], record.p[i], record.var_q[i], record.var_p[i], record.excitation[i],
             std::string(basin_name(record.basin[i]))});
  }
  out.finish();
  return 0;
}

void dump_records(const std::string& path, const std::string& command, const RunConfig& cfg,
                  const EnsembleOptions& e, const std::vector<TrajectoryRecord>& records) {
  Sink out(path);
  CsvWriter csv(out.stream());
  begin(csv, command + " records", cfg);
  csv.header({"trajectory", "seed", "t", "q", "p", "varQ", "varP", "n", "basin"});
  for (std::size_t k = 0; k < records.size(); ++k) {
    const std::string seed = std::to_string(derive_seed(e.master_seed, k));
    const TrajectoryRecord& r = records[k];
    for (std::size_t i = 0; i < r.size(); ++i) {
      csv.row({static_cast<long>(k), seed, r.times[i], r.q[i], r.p[i],
               r.var_q[i], r.var_p[i], r.excitation[i], std::string(basin_name(r.basin[i]))});
    }
  }
  out.finish();
}

EnsembleOptions ensemble_options(RunConfig& cfg, int workers) {
  cfg.set_default("n_traj", "100");
  EnsembleOptions e;
  e.n_traj = static_cast<std::size_t>(cfg.integer("n_traj"));
  e.master_seed = cfg.seed_or("seed", 0);
  e.engine = cfg.engine();
  e.trajectory = trajectory_options(cfg);
  e.keep_records = cfg.has("records_output");
  e.workers = workers;
  return e;
}

int cmd_ensemble(const CommandLine& cl, int workers) {
  RunConfig cfg = load(cl);
  trajectory_defaults(cfg);
  const ModelParams p = cfg.params();
  const Complex alpha = start_alpha(cfg, p);
  const EnsembleOptions e = ensemble_options(cfg, workers);
  EnsembleResult res = run_ensemble(initial_state(alpha, e.engine, basis_size(cfg, e.engine)), p, e);
  if (e.keep_records) {
    if (bistable(p)) {
      const BasinMap basins = make_basin_map(p, cfg.real_or("radius_fraction", 0.35));
      for (TrajectoryRecord& r : res.records) classify_basin(r, basins);
    }
    dump_records(cfg.word_or("records_output", ""), "ensemble", cfg, e, res.records);
  }
  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "ensemble", cfg);
  ensemble_rows(csv, res.stats);
  out.finish();
  return 0;
}

int cmd_transitions(const CommandLine& cl, int workers) {
  RunConfig cfg = load(cl);
  trajectory_defaults(cfg);
  cfg.set_default("start", "lower");
  cfg.set_default("n_traj", "8");
  cfg.set_default("radius_fraction", "0.35");
  const ModelParams p = cfg.params();
  cfg.set_default("burn_in", format_real(3.0 / p.kappa));
  const Complex alpha = start_alpha(cfg, p);
  EnsembleOptions e = ensemble_options(cfg, workers);
  e.keep_records = true;
  EnsembleResult res = run_ensemble(initial_state(alpha, e.engine, basis_size(cfg, e.engine)), p, e);
  const BasinMap basins = make_basin_map(p, cfg.real("radius_fraction"));
  for (TrajectoryRecord& r : res.records) classify_basin(r, basins);
  if (cfg.has("records_output")) dump_records(cfg.word_or("records_output", ""), "transitions", cfg, e, res.records);

  const double burn_in = cfg.real("burn_in");
  const TransitionStats ts = transition_stats(res.records, burn_in, p.kappa);
  double weighted = 0.0;
  for (const TrajectoryRecord& r : res.records) weighted += basin_occupation(r, burn_in).weighted_n;
  weighted /= static_cast<double>(res.records.size());

  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "transitions", cfg);
  csv.comment("n_jumps = " + std::to_string(ts.n_jumps));
  csv.comment("mean_exit_lower = " + format_real(ts.mean_exit_lower));
  csv.comment("stderr_exit_lower = " + format_real(ts.stderr_exit_lower));
  csv.comment("mean_exit_upper = " + format_real(ts.mean_exit_upper));
  csv.comment("stderr_exit_upper = " + format_real(ts.stderr_exit_upper));
  csv.comment("labeled_time = " + format_real(ts.labeled_time));
  csv.comment("tail_time = " + format_real(ts.tail_time));
  csv.comment("dwell_weighted_n = " + format_real(weighted));
  csv.comment("exact_n = " + format_real(mean_excitation(p)));
  csv.header({"basin", "dwell"});
  for (double d : ts.dwell_lower) csv.row({std::string("lower"), d});
  for (double d : ts.dwell_upper) csv.row({std::string("upper"), d});
  out.finish();
  return 0;
}

int cmd_decay(const CommandLine& cl, int workers) {
  RunConfig cfg = load(cl);
  trajectory_defaults(cfg);
  cfg.set_default("n_traj", "100");
  const ModelParams p = cfg.params();
  cfg.set_default("fit_start", format_real(3.0 / p.kappa));
  DecayOptions d;
  d.n_traj = static_cast<std::size_t>(cfg.integer("n_traj"));
  d.seed = cfg.seed_or("seed", 0);
  d.engine = cfg.engine();
  d.basis_dim = basis_size(cfg, d.engine);
  d.trajectory = trajectory_options(cfg);
  d.fit_start = cfg.real("fit_start");
  d.workers = workers;
  const DecayResult res = decay_experiment(p, d);

  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "decay", cfg);
  csv.comment("start_q = " + format_real(sqrt2() * res.start_alpha.real()));
  csv.comment("start_p = " + format_real(sqrt2() * res.start_alpha.imag()));
  csv.comment("steady_q = " + format_real(sqrt2() * res.steady_alpha.real()));
  csv.comment("steady_p = " + format_real(sqrt2() * res.steady_alpha.imag()));
  csv.comment(std::string("fit_ok = ") + (res.fit.ok ? "1" : "0"));
  if (res.fit.ok) {
    csv.comment("tau = " + format_real(res.fit.tau));
    csv.comment("tau_kappa = " + format_real(res.fit.tau_kappa));
    csv.comment("asymptote_q = " + format_real(res.fit.asymptote_q));
    csv.comment("asymptote_p = " + format_real(res.fit.asymptote_p));
  } else {
    csv.comment("fit_message = " + res.fit.message);
  }
  ensemble_rows(csv, res.stats, &res.fit);
  out.finish();
  return res.fit.ok ? 0 : 3;
}

int cmd_hysteresis(const CommandLine& cl) {
  RunConfig cfg = load(cl);
  trajectory_defaults(cfg);
  cfg.set_default("detuning_lo", "-10");
  cfg.set_default("detuning_hi", "-2");
  cfg.set_default("step", "0.1");
  cfg.set_default("t_m", "50");
  const ModelParams p = cfg.params(false);
  HysteresisOptions h;
  h.detuning_lo = cfg.real("detuning_lo");
  h.detuning_hi = cfg.real("detuning_hi");
  h.step = cfg.real("step");
  h.t_m = cfg.real("t_m");
  h.seed = cfg.seed_or("seed", 0);
  h.dt = cfg.real("dt");
  h.scheme = cfg.scheme();
  const std::string engine = cfg.word_or("engine", "mqsd");
  if (engine == "classical") {
    h.engine = SweepEngine::classical;
  } else {
    h.engine = cfg.engine() == Engine::fixed ? SweepEngine::fixed : SweepEngine::mqsd;
    h.basis_dim = basis_size(cfg, cfg.engine());
  }
  const HysteresisRecord rec = hysteresis_sweep(p, h);

  Sink out(cl.output_path);
  CsvWriter csv(out.stream());
  begin(csv, "hysteresis", cfg);
  csv.comment(std::string("jumps_found = ") + (rec.jumps_found ? "1" : "0"));
  csv.comment("up_jump = " + format_real(rec.up_jump));
  csv.comment("down_jump = " + format_real(rec.down_jump));
  csv.comment("detuning_width = " + format_real(rec.detuning_width));
  csv.header({"direction", "detuning", "n"});
  for (const SweepPoint& s : rec.sweep) {
    csv.row({std::string(s.direction == SweepDirection::up ? "up" : "down"), s.detuning, s.excitation});
  }
  out.finish();
  return 0;
}

std::vector<int> parse_criteria(const std::string& text) {
  std::vector<int> ids;
  if (text == "all") {
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
    return ids;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    const long id = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0' || id < 1 || id > kCriterionCount) {
      throw ConfigError("config key 'criteria': expected 'all' or ids in 1..10, got '" + item + "'");
    }
    ids.push_back(static_cast<int>(id));
  }
  return ids;
}

int cmd_validate(const CommandLine& cl, int workers) {
  RunConfig cfg = load(cl);
  cfg.set_default("criteria", "all");
  const std::vector<int> ids = parse_criteria(cfg.word_or("criteria", "all"));
  ValidationOptions opts;
  opts.workers = workers;
  opts.log = [](const std::string& msg) { std::clog << "  .. " << msg << std::endl; };

  std::vector<CriterionResult> results;
  bool all = true;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, opts);
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << std::left << std::setw(28)
              << r.title << std::right << "  " << std::fixed << std::setprecision(1) << std::setw(7) << r.seconds
              << " s  " << r.detail << std::endl;
    std::cout.unsetf(std::ios::floatfield);
    all = all && r.passed;
    results.push_back(r);
  }
  if (!cl.output_path.empty()) {
    Sink out(cl.output_path);
    CsvWriter csv(out.stream());
    begin(csv, "validate", cfg);
    csv.header({"criterion", "title", "passed", "detail"});
    for (const CriterionResult& r : results) {
      csv.row({static_cast<long>(r.id), r.title, long{r.passed}, "\"" + r.detail + "\""});
    }
    out.finish();
  }
  std::cout << (all ? "all selected criteria passed" : "some criteria FAILED") << std::endl;
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum state diffusion for the driven damped Kerr oscillator"};
  app.require_subcommand(1);
  app.footer(std::string("Worker threads: set ") + kWorkersEnv + " (never changes results).");

  struct Command {
    const char* name;
    const char* help;
  };
  const std::vector<Command> commands = {
      {"classical-sweep", "classical steady-state branches over detuning"},
      {"quantum-steady", "exact steady-state excitation over detuning"},
      {"domain-map", "bistable domain boundary in reduced coordinates"},
      {"trajectory", "one QSD trajectory"},
      {"ensemble", "ensemble means and standard errors"},
      {"transitions", "dwell times between the metastable basins"},
      {"decay", "ensemble relaxation from the metastable branch"},
      {"hysteresis", "detuning sweep up and down"},
      {"validate", "run the acceptance checks and print a pass/fail table"},
  };

  std::map<std::string, CommandLine> lines;
  std::map<std::string, std::map<std::string, std::string>> raw;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    CommandLine& cl = lines[c.name];
    sub->add_option("-c,--config", cl.config_path, "config file with key = value lines")->check(CLI::ExistingFile);
    sub->add_option("-o,--output", cl.output_path, "CSV output path (default stdout)");
    for (const KeySpec& k : config_keys()) {
      sub->add_option(std::string("--") + k.name, raw[c.name][k.name], k.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const int workers = workers_from_env();
    for (const Command& c : commands) {
      CLI::App* sub = app.get_subcommand(c.name);
      if (!sub->parsed()) continue;
      CommandLine& cl = lines[c.name];
      for (const KeySpec& k : config_keys()) {
        if (sub->count(std::string("--") + k.name) > 0) cl.flags[k.name] = raw[c.name][k.name];
      }
      const std::string name = c.name;
      if (name == "classical-sweep") return cmd_classical_sweep(cl);
      if (name == "quantum-steady") return cmd_quantum_steady(cl);
      if (name == "domain-map") return cmd_domain_map(cl);
      if (name == "trajectory") return cmd_trajectory(cl);
      if (name == "ensemble") return cmd_ensemble(cl, workers);
      if (name == "transitions") return cmd_transitions(cl, workers);
      if (name == "decay") return cmd_decay(cl, workers);
      if (name == "hysteresis") return cmd_hysteresis(cl);
      if (name == "validate") return cmd_validate(cl, workers);
    }
  } catch (const ConfigError& e) {
    std::cerr << "kerrqsd: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const TruncationError& e) {
    std::cerr << "kerrqsd: basis truncation: " << e.what() << " (increase dim or local_dim)\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "kerrqsd: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
