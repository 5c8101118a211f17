#pragma once

// Minimal strict CSV io: comma-separated, '.' decimal point, one header row,
// all-numeric data rows. Reals are written with 17 significant digits so a
// write/read round trip reproduces every double bit-exactly.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "tibsim/errors.hpp"

namespace tibsim {

inline std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf);
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw MissingColumn("column '" + name + "' not found");
  }
};

inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary keeps line endings byte-stable
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ',';
    out << columns[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw ConfigError("csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw EmptyData("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable table;
  table.columns = detail::split_csv_line(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != table.columns.size())
      throw ConfigError("csv row width mismatch in '" + path + "'");
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const char* begin = fields[i].c_str();
      char* end = nullptr;
      row[i] = std::strtod(begin, &end);
      if (end == begin || *end != '\0')
        throw ConfigError("bad numeric field '" + fields[i] + "' in '" + path + "'");
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw EmptyData("'" + path + "' has no data rows");
  return table;
}

}  // namespace tibsim
