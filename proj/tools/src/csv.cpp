#include "csv.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace molsim::cli {

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error(fmt::format("{}: row has {} cells, expected {}", file, row.size(),
                                       columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";  // no "-0"
  return fmt::format("{:.12g}", v);
}

std::string num(int v) { return fmt::format("{}", v); }

std::string num(bool v) { return v ? "1" : "0"; }

}  // namespace molsim::cli
