#include "kerrqsd/csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace kerrqsd {

std::string format_real(double x) {
  if (x == 0.0) return "0";  // folds -0 into 0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvWriter::comment(const std::string& line) {
  if (columns_ != 0) throw std::logic_error("CsvWriter: comments must precede the header");
  out_ << "# " << line << '\n';
}

void CsvWriter::echo_config(const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) comment(key + " = " + value);
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  if (columns_ != 0) throw std::logic_error("CsvWriter: header written twice");
  if (columns.empty()) throw std::invalid_argument("CsvWriter: empty header");
  columns_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: row width differs from the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (const auto* d = std::get_if<double>(&cells[i])) {
      out_ << format_real(*d);
    } else if (const auto* l = std::get_if<long>(&cells[i])) {
      out_ << *l;
    } else {
      out_ << std::get<std::string>(cells[i]);
    }
  }
  out_ << '\n';
}

}  // namespace kerrqsd
