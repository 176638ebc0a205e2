#pragma once

// Minimal CSV for the result tables: comma separated, no quoting, '#'
// comment lines, first non-comment line is the header.

#include <filesystem>
#include <string>
#include <vector>

namespace abcre {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws malformed_csv when absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  // Empty fields read as missing.
  bool has_value(std::size_t row, const std::string& name) const;
};

// Shortest decimal text that parses back to the same double.
std::string format_number(double x);
double parse_number(const std::string& text);

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);
std::string to_csv_text(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace abcre
