#include "irtbench/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irtbench {

namespace {

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample variance, ddof = 1.
double variance_of(const std::vector<double>& xs, double mean) {
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return s / static_cast<double>(xs.size() - 1);
}

// Biased autocovariance at lag t (normalized by n).
double autocov(const std::vector<double>& xs, double mean, std::size_t t) {
  double s = 0.0;
  for (std::size_t i = 0; i + t < xs.size(); ++i) s += (xs[i] - mean) * (xs[i + t] - mean);
  return s / static_cast<double>(xs.size());
}

}  // namespace

std::optional<double> split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("split_rhat: need at least one chain");
  const std::size_t len = chains.front().size();
  if (len < 4) throw std::invalid_argument("split_rhat: need at least 4 draws per chain");
  for (const auto& c : chains) {
    if (c.size() != len) throw std::invalid_argument("split_rhat: chains must have equal length");
  }

  // Halve each chain; odd lengths drop the middle draw.
  const std::size_t n = len / 2;
  std::vector<std::vector<double>> seqs;
  for (const auto& c : chains) {
    seqs.emplace_back(c.begin(), c.begin() + n);
    seqs.emplace_back(c.end() - n, c.end());
  }

  const std::size_t m = seqs.size();
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = mean_of(seqs[j]);
    vars[j] = variance_of(seqs[j], means[j]);
  }
  const double w = mean_of(vars);
  if (!(w > 0.0)) return std::nullopt;

  const double b = static_cast<double>(n) * variance_of(means, mean_of(means));
  const double var_plus =
      (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + b / static_cast<double>(n);
  return std::sqrt(std::max(1.0, var_plus / w));
}

std::optional<double> ess_bulk(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("ess_bulk: need at least one chain");
  const std::size_t n = chains.front().size();
  if (n < 8) throw std::invalid_argument("ess_bulk: need at least 8 draws per chain");
  for (const auto& c : chains) {
    if (c.size() != n) throw std::invalid_argument("ess_bulk: chains must have equal length");
  }
  const std::size_t m = chains.size();

  // Exactly constant input carries no information; the variance test below
  // would be defeated by accumulation noise.
  bool constant = true;
  for (const auto& c : chains) {
    for (double x : c) {
      if (x != chains.front().front()) {
        constant = false;
        break;
      }
    }
  }
  if (constant) return std::nullopt;

  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean_of(chains[c]);
    vars[c] = variance_of(chains[c], means[c]);
  }
  const double w = mean_of(vars);
  if (!(w > 0.0)) return std::nullopt;

  double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w;
  if (m > 1) var_plus += variance_of(means, mean_of(means));
  if (!(var_plus > 0.0)) return std::nullopt;

  // Combined autocorrelation at lag t across chains; unbiased-variance scale.
  const double ddof = static_cast<double>(n) / (static_cast<double>(n) - 1.0);
  auto rho_at = [&](std::size_t t) {
    double acov_mean = 0.0;
    for (std::size_t c = 0; c < m; ++c) acov_mean += autocov(chains[c], means[c], t) * ddof;
    acov_mean /= static_cast<double>(m);
    return 1.0 - (w - acov_mean) / var_plus;
  };

  // Geyer initial monotone sequence on paired sums rho_{2k} + rho_{2k+1}.
  double tau = 0.0;
  double prev_pair = 0.0;
  for (std::size_t k = 0;; ++k) {
    const std::size_t t0 = 2 * k, t1 = 2 * k + 1;
    if (t1 >= n) break;
    double pair = rho_at(t0) + rho_at(t1);
    if (pair < 0.0) break;
    if (k > 0 && pair > prev_pair) pair = prev_pair;  // enforce monotone decrease
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau -= 1.0;  // rho_0 counted twice above

  const double total = static_cast<double>(m) * static_cast<double>(n);
  if (!(tau > 0.0)) return total;
  return std::min(total, total / tau);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q must be in [0,1]");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

}  // namespace irtbench
