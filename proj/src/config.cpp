#include "kerrqsd/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kerrqsd {

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"detuning", ValueKind::real, "detuning dw = w0 - w"},
      {"drive", ValueKind::real, "drive amplitude beta"},
      {"chi", ValueKind::real, "anharmonicity chi >= 0"},
      {"kappa", ValueKind::real, "damping rate kappa > 0"},
      {"dim", ValueKind::integer, "fixed Fock basis size"},
      {"local_dim", ValueKind::integer, "moving-basis local size"},
      {"dt", ValueKind::real, "time step"},
      {"t_final", ValueKind::real, "trajectory duration"},
      {"seed", ValueKind::seed, "64-bit master seed"},
      {"engine", ValueKind::word, "fixed | mqsd (hysteresis also: classical)"},
      {"scheme", ValueKind::word, "exponential | euler"},
      {"record_stride", ValueKind::integer, "steps between recorded samples"},
      {"recenter_threshold", ValueKind::real, "moving-basis re-centering threshold"},
      {"n_traj", ValueKind::integer, "number of trajectories"},
      {"t_m", ValueKind::real, "measurement delay per sweep step"},
      {"step", ValueKind::real, "detuning increment"},
      {"detuning_lo", ValueKind::real, "lower end of the detuning range"},
      {"detuning_hi", ValueKind::real, "upper end of the detuning range"},
      {"q0", ValueKind::real, "initial <Q> of the coherent start"},
      {"p0", ValueKind::real, "initial <P> of the coherent start"},
      {"start", ValueKind::word, "coherent | lower | upper | far (decay start branch)"},
      {"radius_fraction", ValueKind::real, "basin radius / inter-branch distance"},
      {"burn_in", ValueKind::real, "time discarded before transition bookkeeping"},
      {"fit_start", ValueKind::real, "start of the decay fit window"},
      {"points", ValueKind::integer, "grid points for domain-map"},
      {"criteria", ValueKind::word, "comma-separated acceptance criteria for validate"},
      {"records_output", ValueKind::word, "per-trajectory CSV dump (ensemble)"},
  };
  return keys;
}

namespace {

const KeySpec* find_key(const std::string& key) {
  for (const KeySpec& k : config_keys()) {
    if (key == k.name) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double to_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    bad_value(key, v, "a finite real number");
  }
  return x;
}

long to_integer(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) bad_value(key, v, "an integer");
  return x;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  if (v.empty() || v[0] == '-') bad_value(key, v, "a non-negative 64-bit integer");
  const unsigned long long x = std::strtoull(v.c_str(), &end, 0);
  if (end != v.c_str() + v.size() || errno == ERANGE) bad_value(key, v, "a non-negative 64-bit integer");
  return static_cast<std::uint64_t>(x);
}

void check_entry(const std::string& key, const std::string& value) {
  const KeySpec* info = find_key(key);
  if (info == nullptr) throw ConfigError("unknown config key '" + key + "'");
  switch (info->kind) {
    case ValueKind::real:
      (void)to_real(key, value);
      break;
    case ValueKind::integer:
      (void)to_integer(key, value);
      break;
    case ValueKind::seed:
      (void)to_seed(key, value);
      break;
    case ValueKind::word:
      if (value.empty()) bad_value(key, value, "a non-empty word");
      break;
  }
}

void check_preconditions(const RunConfig& c) {
  auto positive = [&](const char* key) {
    if (c.has(key) && !(c.real(key) > 0.0)) throw ConfigError(std::string("config key '") + key + "' must be positive");
  };
  auto at_least = [&](const char* key, long lo) {
    if (c.has(key) && c.integer(key) < lo) {
      throw ConfigError(std::string("config key '") + key + "' must be >= " + std::to_string(lo));
    }
  };
  if (c.has("chi") && c.real("chi") < 0.0) throw ConfigError("config key 'chi' must be >= 0");
  positive("kappa");
  positive("dt");
  positive("t_m");
  positive("step");
  positive("recenter_threshold");
  if (c.has("t_final") && c.real("t_final") < 0.0) throw ConfigError("config key 't_final' must be >= 0");
  if (c.has("burn_in") && c.real("burn_in") < 0.0) throw ConfigError("config key 'burn_in' must be >= 0");
  at_least("dim", 2);
  at_least("local_dim", 2);
  at_least("record_stride", 1);
  at_least("n_traj", 2);
  at_least("points", 2);
  if (c.has("radius_fraction")) {
    const double r = c.real("radius_fraction");
    if (!(r > 0.0 && r < 0.5)) throw ConfigError("config key 'radius_fraction' must lie in (0, 0.5)");
  }
  if (c.has("detuning_lo") && c.has("detuning_hi") && !(c.real("detuning_hi") > c.real("detuning_lo"))) {
    throw ConfigError("config keys 'detuning_lo' and 'detuning_hi' must satisfy detuning_lo < detuning_hi");
  }
  // "classical" is only meaningful for detuning sweeps; the CLI checks that.
  if (c.has("engine") && c.word_or("engine", "") != "classical") (void)c.engine();
  if (c.has("scheme")) (void)c.scheme();
}

}  // namespace

double RunConfig::real(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
  return to_real(key, it->second);
}

double RunConfig::real_or(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

long RunConfig::integer(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
  return to_integer(key, it->second);
}

long RunConfig::integer_or(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t RunConfig::seed_or(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? to_seed(key, values_.at(key)) : fallback;
}

std::string RunConfig::word_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? values_.at(key) : fallback;
}

ModelParams RunConfig::params(bool need_detuning) const {
  ModelParams p;
  p.detuning = need_detuning ? real("detuning") : real_or("detuning", 0.0);
  p.drive = real("drive");
  p.chi = real("chi");
  p.kappa = real("kappa");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

Engine RunConfig::engine() const {
  const std::string e = word_or("engine", "mqsd");
  if (e == "fixed") return Engine::fixed;
  if (e == "mqsd") return Engine::mqsd;
  bad_value("engine", e, "'fixed' or 'mqsd'");
}

Scheme RunConfig::scheme() const {
  const std::string s = word_or("scheme", "exponential");
  if (s == "exponential") return Scheme::exponential;
  if (s == "euler") return Scheme::euler;
  bad_value("scheme", s, "'exponential' or 'euler'");
}

void RunConfig::set_default(const std::string& key, const std::string& value) {
  check_entry(key, value);
  values_.emplace(key, value);
}

RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    check_entry(key, value);
    if (cfg.values_.count(key) != 0) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key '" + key + "' given twice");
    }
    cfg.values_[key] = value;
  }
  for (const auto& [key, value] : overrides) {
    check_entry(key, value);
    cfg.values_[key] = value;
  }
  check_preconditions(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path, const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

}  // namespace kerrqsd
