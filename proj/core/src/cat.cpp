#include "irtbench/cat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "irtbench/csv.hpp"
#include "irtbench/error.hpp"
#include "irtbench/rng.hpp"

namespace irtbench {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

// Log likelihood of one item's responses over the whole grid.
std::vector<double> response_loglik(const CatResponse& r, const ItemBank::Item& item,
                                    const std::vector<double>& grid) {
  std::vector<double> ll(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double z = item.a * (grid[k] - item.b);
    ll[k] = static_cast<double>(r.successes) * log_sigmoid(z) +
            static_cast<double>(r.attempts - r.successes) * log_sigmoid(-z);
  }
  return ll;
}

AbilityEstimate estimate_from_logpost(const std::vector<double>& grid,
                                      const std::vector<double>& logpost) {
  const double lmax = *std::max_element(logpost.begin(), logpost.end());
  if (!std::isfinite(lmax)) throw NumericError("cat: posterior vanished on the ability grid");
  double norm = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = std::exp(logpost[k] - lmax);
    norm += w;
    mean += w * grid[k];
  }
  if (!(norm > 0.0)) throw NumericError("cat: posterior vanished on the ability grid");
  mean /= norm;
  double var = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = std::exp(logpost[k] - lmax);
    var += w * (grid[k] - mean) * (grid[k] - mean);
  }
  var /= norm;
  return {mean, std::sqrt(var)};
}

const ItemBank::Item& find_item(const ItemBank& bank, const std::string& label) {
  for (const auto& item : bank.items) {
    if (item.label == label) return item;
  }
  throw std::invalid_argument("cat: response references unknown item '" + label + "'");
}

}  // namespace

void ItemBank::validate() const {
  std::set<std::string> labels;
  for (const auto& item : items) {
    if (!(item.a > 0.0)) throw InputError("item bank: discrimination must be positive");
    if (!labels.insert(item.label).second) {
      throw InputError("item bank: duplicate label '" + item.label + "'");
    }
  }
}

void CatConfig::validate() const {
  if (!(sem_stop > 0.0)) throw InputError("cat: sem_stop must be positive");
  if (attempts_per_item < 1) throw InputError("cat: attempts_per_item must be >= 1");
  if (!(prior_scale > 0.0)) throw InputError("cat: prior_scale must be positive");
  estimator_grid.validate();
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::sem_reached: return "sem_reached";
    case StopReason::budget_exhausted: return "budget_exhausted";
    case StopReason::bank_exhausted: return "bank_exhausted";
  }
  return "unknown";
}

std::string select_next_item(const ItemBank& bank, const std::vector<std::string>& administered,
                             double theta_estimate) {
  const std::set<std::string> used(administered.begin(), administered.end());
  const std::string* best = nullptr;
  double best_info = -1.0;
  for (const auto& item : bank.items) {
    if (used.count(item.label)) continue;
    const double p = success_probability(item.a, item.b, theta_estimate);
    const double info = item.a * item.a * p * (1.0 - p);
    if (info > best_info) {  // strict: ties keep the earliest bank position
      best_info = info;
      best = &item.label;
    }
  }
  if (!best) throw std::invalid_argument("cat: item bank exhausted");
  return *best;
}

AbilityEstimate update_ability(const std::vector<CatResponse>& responses, const ItemBank& bank,
                               const CatConfig& config) {
  config.validate();
  bank.validate();
  const auto grid = config.estimator_grid.points();
  std::vector<double> logpost(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    logpost[k] = -grid[k] * grid[k] / (2.0 * config.prior_scale * config.prior_scale);
  }
  for (const auto& r : responses) {
    const auto ll = response_loglik(r, find_item(bank, r.item_label), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) logpost[k] += ll[k];
  }
  return estimate_from_logpost(grid, logpost);
}

CatSession run_cat(const ItemBank& bank, double true_theta, const CatConfig& config,
                   std::uint64_t seed) {
  config.validate();
  bank.validate();
  if (bank.items.empty()) throw std::invalid_argument("cat: empty item bank");
  const int budget = config.max_items > 0
                         ? std::min<int>(config.max_items, static_cast<int>(bank.items.size()))
                         : static_cast<int>(bank.items.size());

  Rng rng(seed);
  const auto grid = config.estimator_grid.points();
  std::vector<double> logpost(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    logpost[k] = -grid[k] * grid[k] / (2.0 * config.prior_scale * config.prior_scale);
  }

  CatSession session;
  std::vector<std::string> administered_labels;
  while (true) {
    const AbilityEstimate est = estimate_from_logpost(grid, logpost);
    session.estimate_trace.push_back(est);
    session.theta_estimate = est.theta;
    session.theta_se = est.se;
    if (est.se <= config.sem_stop) {
      session.stopped_reason = StopReason::sem_reached;
      break;
    }
    if (static_cast<int>(session.administered.size()) >= budget) {
      session.stopped_reason = static_cast<int>(session.administered.size()) >=
                                       static_cast<int>(bank.items.size())
                                   ? StopReason::bank_exhausted
                                   : StopReason::budget_exhausted;
      break;
    }

    const std::string label = select_next_item(bank, administered_labels, est.theta);
    const ItemBank::Item& item = find_item(bank, label);
    const double p = success_probability(item.a, item.b, true_theta);
    CatResponse response;
    response.item_label = label;
    response.attempts = config.attempts_per_item;
    response.successes = rng.binomial(config.attempts_per_item, p);
    const auto ll = response_loglik(response, item, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) logpost[k] += ll[k];
    session.administered.push_back(response);
    administered_labels.push_back(label);
  }
  return session;
}

ItemBank bank_from_summary(const PosteriorSummary& summary) {
  // Collect a[...] / b[...] medians keyed by the bracket contents, keeping
  // the order in which a-entries appear.
  std::vector<std::string> order;
  std::map<std::string, double> a_medians, b_medians;
  for (const auto& p : summary.parameters) {
    if (p.name.size() > 3 && p.name.rfind("a[", 0) == 0 && p.name.back() == ']') {
      const std::string key = p.name.substr(2, p.name.size() - 3);
      order.push_back(key);
      a_medians[key] = p.median;
    } else if (p.name.size() > 3 && p.name.rfind("b[", 0) == 0 && p.name.back() == ']') {
      b_medians[p.name.substr(2, p.name.size() - 3)] = p.median;
    }
  }
  if (order.empty()) throw std::invalid_argument("bank_from_summary: no a[i] entries in summary");
  ItemBank bank;
  for (const auto& key : order) {
    if (!b_medians.count(key)) {
      throw std::invalid_argument("bank_from_summary: missing b[" + key + "]");
    }
    bank.items.push_back({key, a_medians[key], b_medians[key]});
  }
  bank.validate();
  return bank;
}

std::vector<CatReplication> run_cat_batch(const ItemBank& bank, int replications, double theta_lo,
                                          double theta_hi, const CatConfig& config,
                                          std::uint64_t seed) {
  if (replications < 1) throw InputError("cat: replications must be >= 1");
  if (!(theta_lo < theta_hi)) throw InputError("cat: need theta_lo < theta_hi");
  std::vector<CatReplication> batch;
  batch.reserve(replications);
  for (int r = 0; r < replications; ++r) {
    Rng rng(derive_seed(seed, 2 * static_cast<std::uint64_t>(r)));
    double theta;
    do {
      theta = rng.normal(0.0, config.prior_scale);
    } while (theta < theta_lo || theta > theta_hi);
    const CatSession session =
        run_cat(bank, theta, config, derive_seed(seed, 2 * static_cast<std::uint64_t>(r) + 1));
    CatReplication rep;
    rep.replication = r + 1;
    rep.true_theta = theta;
    rep.final_estimate = session.theta_estimate;
    rep.final_se = session.theta_se;
    rep.items_used = static_cast<int>(session.administered.size());
    rep.stop_reason = session.stopped_reason;
    batch.push_back(rep);
  }
  return batch;
}

void CatSession::write_session_csv(std::ostream& out) const {
  write_csv_row(out, {"step", "item_label", "attempts", "successes", "theta_estimate", "theta_se"});
  for (std::size_t s = 0; s < administered.size(); ++s) {
    // estimate_trace[s + 1] is the estimate after the s-th administration
    const AbilityEstimate& est = estimate_trace[s + 1];
    write_csv_row(out, {std::to_string(s + 1), administered[s].item_label,
                        std::to_string(administered[s].attempts),
                        std::to_string(administered[s].successes), format_double(est.theta),
                        format_double(est.se)});
  }
}

void write_batch_csv(std::ostream& out, const std::vector<CatReplication>& batch) {
  write_csv_row(out, {"replication", "true_theta", "final_estimate", "final_se", "items_used",
                      "stop_reason"});
  for (const auto& r : batch) {
    write_csv_row(out, {std::to_string(r.replication), format_double(r.true_theta),
                        format_double(r.final_estimate), format_double(r.final_se),
                        std::to_string(r.items_used), to_string(r.stop_reason)});
  }
}

}  // namespace irtbench
