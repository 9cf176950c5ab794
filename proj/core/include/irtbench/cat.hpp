#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "irtbench/information.hpp"
#include "irtbench/sampler.hpp"

namespace irtbench {

// Calibrated items available to the adaptive test.
struct ItemBank {
  struct Item {
    std::string label;
    double a = 1.0;
    double b = 0.0;
  };
  std::vector<Item> items;

  void validate() const;
};

struct CatConfig {
  double sem_stop = 0.3;
  int max_items = 0;  // 0 means the whole bank
  int attempts_per_item = 1;
  AbilityGrid estimator_grid{-6.0, 6.0, 0.01};
  double prior_scale = 5.0;

  void validate() const;
};

enum class StopReason { sem_reached, budget_exhausted, bank_exhausted };
const char* to_string(StopReason r);

struct CatResponse {
  std::string item_label;
  long attempts = 0;
  long successes = 0;
};

struct AbilityEstimate {
  double theta = 0.0;
  double se = 0.0;
};

// The evolving state of one adaptive test: what was administered, the
// running ability estimate and its standard error, and why the test stopped.
struct CatSession {
  std::vector<CatResponse> administered;
  std::vector<AbilityEstimate> estimate_trace;  // after each administration (and the prior-only start)
  double theta_estimate = 0.0;
  double theta_se = 0.0;
  StopReason stopped_reason = StopReason::sem_reached;

  void write_session_csv(std::ostream& out) const;
};

// The unadministered item with maximum information at the current ability
// estimate; ties go to the earliest bank position.
std::string select_next_item(const ItemBank& bank, const std::vector<std::string>& administered,
                             double theta_estimate);

// Expected-a-posteriori ability estimate on the grid: Normal(0, prior_scale)
// prior times binomial likelihoods, normalized by the rectangle rule.
// Returns the posterior mean and standard deviation.
AbilityEstimate update_ability(const std::vector<CatResponse>& responses, const ItemBank& bank,
                               const CatConfig& config);

// Simulates a full adaptive session against a test taker of known ability.
// Deterministic given (bank, true_theta, config, seed).
CatSession run_cat(const ItemBank& bank, double true_theta, const CatConfig& config,
                   std::uint64_t seed);

// Item bank from the posterior medians of a fitted model's a[i]/b[i] entries.
ItemBank bank_from_summary(const PosteriorSummary& summary);

struct CatReplication {
  int replication = 0;
  double true_theta = 0.0;
  double final_estimate = 0.0;
  double final_se = 0.0;
  int items_used = 0;
  StopReason stop_reason = StopReason::sem_reached;
};

// Batch of independent sessions with true abilities drawn from the prior
// truncated to [theta_lo, theta_hi]; per-replication seeds derive from seed.
std::vector<CatReplication> run_cat_batch(const ItemBank& bank, int replications, double theta_lo,
                                          double theta_hi, const CatConfig& config,
                                          std::uint64_t seed);

void write_batch_csv(std::ostream& out, const std::vector<CatReplication>& batch);

}  // namespace irtbench
