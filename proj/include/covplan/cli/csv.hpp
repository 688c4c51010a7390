#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace covplan::cli {

// Rectangular comma-separated table with a header row. Fields containing a
// comma, quote or newline are double-quoted on output.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  int require_column(const std::string& name) const;  // throws MissingColumn
  std::vector<double> numeric_column(const std::string& name) const;
  bool operator==(const CsvTable&) const = default;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

// Shortest decimal form that parses back to the same double.
std::string format_number(double value);
// Strict parse of the whole field; throws InvalidData.
double parse_number(const std::string& text, const std::string& context);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace covplan::cli
