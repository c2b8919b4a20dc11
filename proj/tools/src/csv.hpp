#pragma once

#include <string>
#include <vector>

namespace molsim::cli {

/// A CSV file preceded by a block of '# ' comment lines. Cells are stored
/// already formatted so the bytes on disk only depend on the values.
struct CsvTable {
  std::string file;
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string render() const;
};

/// Shortest round-trippable form is overkill for plots; 12 significant
/// digits, "nan" for missing values.
std::string num(double v);
std::string num(int v);
std::string num(bool v);

}  // namespace molsim::cli
