#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "irtbench/model.hpp"

namespace irtbench {

// Mass matrix structure estimated during warmup. Diagonal is the default;
// dense helps strongly correlated posteriors (the 2PL scale ridge) at the
// cost of an O(dim^2) covariance estimate.
enum class MetricType { diagonal, dense };

struct SamplerConfig {
  int chains = 4;
  int draws_per_chain = 5000;
  int warmup = 1000;
  double target_accept = 0.8;
  int max_leapfrog_steps = 1024;
  std::uint64_t master_seed = 0;
  double divergence_energy_threshold = 1000.0;
  MetricType metric = MetricType::diagonal;
  // Multiplier applied to the adapted step size after warmup. 1.0 in normal
  // use; tests lower it to probe energy conservation.
  double post_warmup_step_scale = 1.0;

  void validate() const;
};

// Post-warmup draws on the constrained scale (a = exp(log_a) applied).
// Draw (chain c, iteration d, parameter k) lives at
// draws[(c * draws_per_chain + d) * dim + k].
struct PosteriorDraws {
  std::vector<std::string> parameter_names;  // a[1..I], b[1..I], theta[1..P]
  int n_chains = 0;
  int draws_per_chain = 0;
  std::vector<double> draws;
  std::vector<std::uint8_t> divergent;  // per (chain, iteration)
  std::uint64_t seed_used = 0;
  std::vector<double> step_size;    // adapted step size per chain
  std::vector<double> mean_accept;  // mean post-warmup acceptance statistic per chain

  int dim() const { return static_cast<int>(parameter_names.size()); }
  double value(int chain, int draw, int param) const {
    return draws[(static_cast<std::size_t>(chain) * draws_per_chain + draw) * dim() + param];
  }
  bool is_divergent(int chain, int draw) const {
    return divergent[static_cast<std::size_t>(chain) * draws_per_chain + draw] != 0;
  }
  long divergence_count() const;

  // One parameter's series, one vector per chain (split_rhat/ess_bulk input).
  std::vector<std::vector<double>> chain_series(int param) const;
  // All chains pooled, chain-major order.
  std::vector<double> pooled(int param) const;

  // CSV with columns chain, iteration, divergent, then one per parameter.
  void write_draws_csv(std::ostream& out) const;
  static PosteriorDraws from_draws_csv(std::istream& in);
};

struct ParameterSummary {
  std::string name;
  double median = 0.0;
  double ci50_lo = 0.0, ci50_hi = 0.0;
  double ci90_lo = 0.0, ci90_hi = 0.0;
  std::optional<double> rhat;
  std::optional<double> ess_bulk;
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  long divergence_count = 0;

  const ParameterSummary* find(const std::string& name) const;
  void write_summary_csv(std::ostream& out) const;
  static PosteriorSummary from_summary_csv(std::istream& in);
  static PosteriorSummary from_summary_csv_file(const std::string& path);
};

// Draws posterior samples of (a, b, theta) with multinomial no-U-turn HMC.
// Warmup adapts the step size by dual averaging toward target_accept and a
// diagonal mass matrix over windowed intervals; both are frozen afterwards.
// Chain c runs on a seed derived from (master_seed, c), so chains are
// independent and the output is reproducible bit for bit.
PosteriorDraws sample(const ResponseMatrix& data, const PriorConfig& priors,
                      const SamplerConfig& config);

// Pooled-draw medians and central 50%/90% intervals per parameter, plus
// split-Rhat, bulk ESS and the total divergence count.
PosteriorSummary summarize(const PosteriorDraws& draws);

struct MapResult {
  ParameterPoint point;
  bool converged = false;           // gradient max-norm fell below 1e-6
  int iterations = 0;
  double initial_log_posterior = 0.0;
  double final_log_posterior = 0.0;
};

// Gradient ascent with backtracking line search on log_posterior; a fast
// point-estimate mode for item banks and smoke tests.
MapResult map_estimate(const ResponseMatrix& data, const PriorConfig& priors,
                       std::uint64_t seed, int max_iterations);

std::vector<std::string> make_parameter_names(int n_items, int n_persons);

}  // namespace irtbench
