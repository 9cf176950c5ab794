#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace irtbench {

// Minimal RFC-4180-style CSV: comma separated, double quotes for fields that
// contain commas/quotes/newlines, "" escapes a quote. Unquoted fields are
// whitespace-trimmed on read.
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::vector<std::vector<std::string>> read_csv_file(const std::string& path);

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

std::string trim(const std::string& s);

}  // namespace irtbench
