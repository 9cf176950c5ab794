#include "irtbench/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "irtbench/csv.hpp"
#include "irtbench/error.hpp"

namespace irtbench {

namespace {

long parse_integer(const std::string& s, const std::string& what) {
  if (s.empty()) throw InputError("empty " + what + " field");
  std::size_t pos = 0;
  long v;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw InputError("non-numeric " + what + ": '" + s + "'");
  }
  if (pos != s.size()) throw InputError("non-numeric " + what + ": '" + s + "'");
  return v;
}

double parse_real(const std::string& s, const std::string& what) {
  if (s.empty()) throw InputError("empty " + what + " field");
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InputError("non-numeric " + what + ": '" + s + "'");
  }
  if (pos != s.size()) throw InputError("non-numeric " + what + ": '" + s + "'");
  return v;
}

bool parse_success_flag(const std::string& s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw InputError("success value must be one of {0,1,true,false}, got '" + s + "'");
}

// Splits a label into (prefix, trailing digit run). "f10" -> ("f", 10).
std::pair<std::string, std::optional<long>> split_numeric_suffix(const std::string& s) {
  std::size_t i = s.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
  if (i == s.size()) return {s, std::nullopt};
  // Guard against suffixes too long for a long.
  if (s.size() - i > 18) return {s, std::nullopt};
  return {s.substr(0, i), std::stol(s.substr(i))};
}

}  // namespace

bool natural_label_less(const std::string& a, const std::string& b) {
  auto [pa, na] = split_numeric_suffix(a);
  auto [pb, nb] = split_numeric_suffix(b);
  if (na && nb && pa == pb) {
    if (*na != *nb) return *na < *nb;
    return a < b;
  }
  return a < b;
}

std::vector<RunRecord> parse_run_csv(std::istream& in) {
  auto rows = read_csv(in);
  if (rows.empty()) throw InputError("run csv: empty input");

  const auto& header = rows.front();
  std::map<std::string, int> col;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) col[trim(header[i])] = i;

  for (const char* required : {"suite", "function_id", "dimension", "algorithm", "run_id"}) {
    if (!col.count(required)) throw InputError(std::string("run csv: missing column '") + required + "'");
  }
  const bool has_success = col.count("success") > 0;
  const bool has_precision = col.count("best_precision") > 0;
  if (has_success == has_precision) {
    throw InputError("run csv: need exactly one of columns 'success' and 'best_precision'");
  }
  const int outcome_col = has_success ? col["success"] : col["best_precision"];

  std::vector<RunRecord> records;
  std::set<std::tuple<std::string, std::string, int, std::string, long>> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw InputError("run csv: row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                       " fields, header has " + std::to_string(header.size()));
    }
    RunRecord rec;
    rec.suite = row[col["suite"]];
    rec.function_id = row[col["function_id"]];
    rec.dimension = static_cast<int>(parse_integer(row[col["dimension"]], "dimension"));
    if (rec.dimension <= 0) throw InputError("dimension must be positive, got " + std::to_string(rec.dimension));
    rec.algorithm = row[col["algorithm"]];
    rec.run_id = parse_integer(row[col["run_id"]], "run_id");
    if (rec.run_id < 0) throw InputError("run_id must be non-negative, got " + std::to_string(rec.run_id));

    if (has_success) {
      rec.outcome = parse_success_flag(row[outcome_col]);
    } else {
      double prec = parse_real(row[outcome_col], "best_precision");
      if (!std::isfinite(prec) || prec < 0.0) {
        throw InputError("best_precision must be finite and >= 0, got '" + row[outcome_col] + "'");
      }
      rec.outcome = prec;
    }

    auto key = std::make_tuple(rec.suite, rec.function_id, rec.dimension, rec.algorithm, rec.run_id);
    if (!seen.insert(key).second) {
      throw InputError("duplicate run key (" + rec.suite + "," + rec.function_id + "," +
                       std::to_string(rec.dimension) + "," + rec.algorithm + "," + std::to_string(rec.run_id) + ")");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RunRecord> parse_run_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_run_csv(in);
}

ResponseMatrix build_response_matrix(const std::vector<RunRecord>& records,
                                     const SuccessCriterion& criterion, int dimension) {
  if (dimension <= 0) throw InputError("dimension must be positive");
  if (criterion.target_precision < 0.0 || !std::isfinite(criterion.target_precision)) {
    throw InputError("target_precision must be finite and >= 0");
  }

  std::vector<const RunRecord*> at_dim;
  for (const auto& r : records) {
    if (r.dimension == dimension) at_dim.push_back(&r);
  }
  if (at_dim.empty()) throw InputError("no records at dimension " + std::to_string(dimension));

  std::set<std::string> item_set, person_set;
  for (const auto* r : at_dim) {
    item_set.insert(r->function_id);
    person_set.insert(r->algorithm);
  }
  if (item_set.size() < 2) throw InputError("need at least 2 distinct functions at the requested dimension");
  if (person_set.size() < 2) throw InputError("need at least 2 distinct algorithms at the requested dimension");

  ResponseMatrix m;
  m.items.assign(item_set.begin(), item_set.end());
  std::sort(m.items.begin(), m.items.end(), natural_label_less);
  m.persons.assign(person_set.begin(), person_set.end());  // std::set is already lexicographic

  std::map<std::string, int> item_index, person_index;
  for (int i = 0; i < m.n_items(); ++i) item_index[m.items[i]] = i;
  for (int p = 0; p < m.n_persons(); ++p) person_index[m.persons[p]] = p;

  m.attempts.assign(m.items.size() * m.persons.size(), 0);
  m.successes.assign(m.items.size() * m.persons.size(), 0);
  for (const auto* r : at_dim) {
    const std::size_t k = m.idx(item_index[r->function_id], person_index[r->algorithm]);
    m.attempts[k] += 1;
    const bool success = r->has_flag() ? std::get<bool>(r->outcome)
                                       : std::get<double>(r->outcome) <= criterion.target_precision;
    if (success) m.successes[k] += 1;
  }
  m.validate();
  return m;
}

void ResponseMatrix::validate() const {
  const std::size_t cells = items.size() * persons.size();
  if (attempts.size() != cells || successes.size() != cells) {
    throw InputError("response matrix: grid size does not match label lists");
  }
  if (items.size() < 2) throw InputError("response matrix: need at least 2 items");
  if (persons.size() < 2) throw InputError("response matrix: need at least 2 persons");
  std::set<std::string> iu(items.begin(), items.end());
  if (iu.size() != items.size()) throw InputError("response matrix: duplicate item labels");
  std::set<std::string> pu(persons.begin(), persons.end());
  if (pu.size() != persons.size()) throw InputError("response matrix: duplicate person labels");
  for (std::size_t k = 0; k < cells; ++k) {
    if (attempts[k] < 0 || successes[k] < 0 || successes[k] > attempts[k]) {
      throw InputError("response matrix: cell " + std::to_string(k) + " violates 0 <= successes <= attempts");
    }
  }
}

std::string ResponseMatrix::to_json() const {
  nlohmann::json j;
  j["items"] = items;
  j["persons"] = persons;
  nlohmann::json att = nlohmann::json::array(), suc = nlohmann::json::array();
  for (int i = 0; i < n_items(); ++i) {
    nlohmann::json arow = nlohmann::json::array(), srow = nlohmann::json::array();
    for (int p = 0; p < n_persons(); ++p) {
      arow.push_back(attempts_at(i, p));
      srow.push_back(successes_at(i, p));
    }
    att.push_back(std::move(arow));
    suc.push_back(std::move(srow));
  }
  j["attempts"] = std::move(att);
  j["successes"] = std::move(suc);
  return j.dump(2) + "\n";
}

ResponseMatrix ResponseMatrix::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("response matrix json: ") + e.what());
  }
  ResponseMatrix m;
  try {
    m.items = j.at("items").get<std::vector<std::string>>();
    m.persons = j.at("persons").get<std::vector<std::string>>();
    const auto& att = j.at("attempts");
    const auto& suc = j.at("successes");
    if (att.size() != m.items.size() || suc.size() != m.items.size()) {
      throw InputError("response matrix json: row count does not match items");
    }
    for (std::size_t i = 0; i < m.items.size(); ++i) {
      if (att[i].size() != m.persons.size() || suc[i].size() != m.persons.size()) {
        throw InputError("response matrix json: column count does not match persons");
      }
      for (std::size_t p = 0; p < m.persons.size(); ++p) {
        m.attempts.push_back(att[i][p].get<long>());
        m.successes.push_back(suc[i][p].get<long>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("response matrix json: ") + e.what());
  }
  m.validate();
  return m;
}

ResponseMatrix ResponseMatrix::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace irtbench
