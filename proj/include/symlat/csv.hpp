#pragma once

// Minimal CSV support: RFC 4180 quoting, shortest round-trip numbers, and a
// reader for the files this library writes.

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "symlat/error.hpp"

namespace symlat {

/// Quotes a field when it holds a comma, quote or line break.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw ArgumentError("no column '" + name + "'");
  }

  double number(std::size_t row, const std::string& name) const {
    const auto& cell = rows.at(row).at(column(name));
    double v = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size()) throw ArgumentError("cell '" + cell + "' is not a number");
    return v;
  }
};

/// Splits one record, honouring quotes; a quoted field may not span lines.
inline std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ArgumentError("unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

inline CsvTable read_csv_table(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("empty CSV");
  t.header = split_csv_record(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_record(line));
    if (t.rows.back().size() != t.header.size()) throw ArgumentError("CSV row width differs from header");
  }
  return t;
}

inline CsvTable read_csv_table(const std::string& text) {
  std::istringstream in(text);
  return read_csv_table(in);
}

}  // namespace symlat
