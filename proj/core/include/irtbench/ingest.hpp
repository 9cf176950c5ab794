#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace irtbench {

// One benchmark run: an algorithm attempting one function at one dimension.
// The outcome is either an explicit success flag or the best objective
// precision reached (distance to optimum, >= 0).
struct RunRecord {
  std::string suite;
  std::string function_id;
  int dimension = 0;
  std::string algorithm;
  long run_id = 0;
  std::variant<bool, double> outcome;  // success flag | best precision

  bool has_flag() const { return std::holds_alternative<bool>(outcome); }
};

// A run with a recorded precision succeeds iff precision <= target_precision.
struct SuccessCriterion {
  double target_precision = 0.0;
};

// Items x persons table of attempt counts N and success counts y. Items are
// benchmark functions at a fixed dimension, persons are algorithms. Grids are
// row-major, item-major: cell (i, p) at index i * persons.size() + p.
struct ResponseMatrix {
  std::vector<std::string> items;
  std::vector<std::string> persons;
  std::vector<long> attempts;
  std::vector<long> successes;

  int n_items() const { return static_cast<int>(items.size()); }
  int n_persons() const { return static_cast<int>(persons.size()); }

  long attempts_at(int item, int person) const { return attempts[idx(item, person)]; }
  long successes_at(int item, int person) const { return successes[idx(item, person)]; }
  std::size_t idx(int item, int person) const {
    return static_cast<std::size_t>(item) * persons.size() + static_cast<std::size_t>(person);
  }

  // Full invariant check: consistent grid sizes, 0 <= y <= N, unique labels,
  // and at least 2 items and 2 persons. Throws InputError.
  void validate() const;

  std::string to_json() const;
  static ResponseMatrix from_json(const std::string& text);
  static ResponseMatrix from_json_file(const std::string& path);
};

// Parses a header-bearing run CSV with columns suite, function_id, dimension,
// algorithm, run_id and exactly one of {success, best_precision}. Column
// order is irrelevant; unknown columns are ignored.
std::vector<RunRecord> parse_run_csv(std::istream& in);
std::vector<RunRecord> parse_run_csv(const std::string& text);

// Counts runs and successful runs per (function, algorithm) cell at the
// requested dimension. Success means an explicit flag, or precision <=
// criterion.target_precision. Cells with no runs keep N = 0, y = 0.
// Items are sorted by numeric suffix when present (f2 before f10), persons
// lexicographically.
ResponseMatrix build_response_matrix(const std::vector<RunRecord>& records,
                                     const SuccessCriterion& criterion, int dimension);

// Ordering used for item labels: common prefix + numeric suffix compare
// numerically, everything else lexicographically.
bool natural_label_less(const std::string& a, const std::string& b);

}  // namespace irtbench
