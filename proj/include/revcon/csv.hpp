// Minimal RFC 4180 CSV reader/writer. Fields containing commas, quotes or
// newlines are quoted; embedded quotes are doubled. The reader accepts both
// LF and CRLF line ends and keeps embedded newlines inside quoted fields.
#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "revcon/errors.hpp"

namespace revcon {

using CsvRow = std::vector<std::string>;

inline std::string csv_escape(const std::string& field) {
  bool needs_quotes = false;
  for (char c : field)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs_quotes = true;
      break;
    }
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline void write_csv_row(std::ostream& os, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(row[i]);
  }
  os << "\r\n";
}

// Reads all rows. `line` in errors is 1-based and counts physical lines, so
// it points at the start of the offending record even with embedded newlines.
inline std::vector<CsvRow> read_csv(std::istream& is) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool saw_any = false;

  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    // tolerate blank lines (a record of one empty field)
    if (row.size() != 1 || !row[0].empty()) rows.push_back(row);
    row.clear();
    record_line = line;
  };

  char c;
  while (is.get(c)) {
    saw_any = true;
    if (in_quotes) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty())
          throw MalformedRecord(record_line, "quote inside unquoted field");
        in_quotes = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (is.peek() == '\n') is.get(c);
        [[fallthrough]];
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += c;
    }
  }
  if (in_quotes) throw MalformedRecord(record_line, "unterminated quoted field");
  if (saw_any && (!field.empty() || !row.empty())) end_record();
  return rows;
}

}  // namespace revcon
