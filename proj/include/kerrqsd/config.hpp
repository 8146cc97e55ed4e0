#pragma once

// Flat `key = value` run configuration with `#` comments. Every key has a declared
// type; unknown keys, malformed values and violated preconditions are errors that
// name the key.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kerrqsd/model.hpp"
#include "kerrqsd/qsd.hpp"

namespace kerrqsd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueKind { real, integer, seed, word };

struct KeySpec {
  const char* name;
  ValueKind kind;
  const char* help;
};

/// Every accepted key.
const std::vector<KeySpec>& config_keys();

class RunConfig {
 public:
  /// Resolved entries, sorted by key.
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double real(const std::string& key) const;
  double real_or(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer_or(const std::string& key, long fallback) const;
  std::uint64_t seed_or(const std::string& key, std::uint64_t fallback) const;
  std::string word_or(const std::string& key, const std::string& fallback) const;

  /// Model parameters; `detuning` may be absent when `need_detuning` is false.
  ModelParams params(bool need_detuning = true) const;
  Engine engine() const;
  Scheme scheme() const;

  /// Records a default so it appears in the config echo.
  void set_default(const std::string& key, const std::string& value);

  friend RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides);

 private:
  std::map<std::string, std::string> values_;
};

/// Parses config text, then applies `overrides` (flags win over the file).
RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});

/// Reads and parses a file; throws ConfigError if it cannot be read.
RunConfig parse_config_file(const std::string& path, const std::map<std::string, std::string>& overrides = {});

}  // namespace kerrqsd
