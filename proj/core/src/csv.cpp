#include "abcre/csv.hpp"

#include "abcre/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace abcre {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(' ');
    const auto e = f.find_last_not_of(' ');
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  fail(Errc::malformed_csv, "missing column " + name);
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const auto& field = rows.at(row).at(column(name));
  try {
    return parse_number(field);
  } catch (const Error&) {
    fail(Errc::malformed_csv,
         "row " + std::to_string(row + 1) + " column " + name + ": not a number '" + field + "'");
  }
}

bool CsvTable::has_value(std::size_t row, const std::string& name) const {
  return !rows.at(row).at(column(name)).empty();
}

std::string format_number(double x) {
  if (!std::isfinite(x)) fail(Errc::io_error, "refusing to write a non-finite number");
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& text) {
  double x = 0.0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end || text.empty())
    fail(Errc::malformed_csv, "not a number '" + text + "'");
  return x;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      fail(Errc::malformed_csv, "row " + std::to_string(t.rows.size() + 1) + " has " +
                                    std::to_string(fields.size()) + " fields, header has " +
                                    std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) fail(Errc::malformed_csv, "no header row");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string to_csv_text(const CsvTable& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  out << to_csv_text(table);
  if (!out) fail(Errc::io_error, "write failed for " + path.string());
}

}  // namespace abcre
