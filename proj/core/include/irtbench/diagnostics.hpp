#pragma once

#include <optional>
#include <vector>

namespace irtbench {

// Split potential scale reduction (Gelman-Rubin). Each chain is halved, then
//   R = sqrt(((n-1)/n * W + B/n) / W)
// with W the mean within-sequence sample variance and B the between-sequence
// variance of sequence means scaled by n, clamped below at 1. Returns nullopt
// when the sequences carry no variance (W = 0), which callers must report
// distinctly from 1.0.
std::optional<double> split_rhat(const std::vector<std::vector<double>>& chains);

// Effective sample size from combined-chain autocorrelations:
//   ESS = C*n / (1 + 2 * sum_t rho_t)
// with the sum truncated by Geyer's initial monotone rule on paired sums
// rho_{2k} + rho_{2k+1}, and capped at C*n. nullopt when variance is zero.
std::optional<double> ess_bulk(const std::vector<std::vector<double>>& chains);

// Inclusive linear interpolation quantile (R type 7) on a sorted series.
double quantile_sorted(const std::vector<double>& sorted, double q);
double quantile(std::vector<double> values, double q);

}  // namespace irtbench
