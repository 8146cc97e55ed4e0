#pragma once

// Deterministic CSV: a `#` comment block, one header line, then rows. Reals are
// printed with 17 significant digits so every double round-trips.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace kerrqsd {

std::string format_real(double x);

class CsvWriter {
 public:
  using Cell = std::variant<double, long, std::string>;

  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(const std::string& line);
  /// One `# key = value` line per entry, in key order.
  void echo_config(const std::map<std::string, std::string>& entries);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<Cell>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_ = 0;
};

}  // namespace kerrqsd
