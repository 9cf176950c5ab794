#include "irtbench/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "irtbench/error.hpp"

namespace irtbench {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool row_has_data = false;

  auto push_field = [&]() {
    row.push_back(field_was_quoted ? field : trim(field));
    field.clear();
    field_was_quoted = false;
  };
  auto push_row = [&]() {
    push_field();
    rows.push_back(std::move(row));
    row.clear();
    row_has_data = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_was_quoted = true;
        row_has_data = true;
        break;
      case ',':
        push_field();
        row_has_data = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_data || !trim(field).empty()) push_row();
        field.clear();
        break;
      default:
        field.push_back(c);
        row_has_data = row_has_data || trim(field).size() > 0;
        break;
    }
  }
  if (in_quotes) throw InputError("csv: unterminated quoted field");
  if (row_has_data || !trim(field).empty()) push_row();
  return rows;
}

std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  return read_csv(in);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

}  // namespace irtbench
