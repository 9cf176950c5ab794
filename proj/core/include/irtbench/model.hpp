#pragma once

#include <cstdint>
#include <vector>

#include "irtbench/ingest.hpp"

namespace irtbench {

// One parameter assignment in the unconstrained space the sampler works in:
// log_a (item discriminations on the log scale, so a = exp(log_a) > 0 by
// construction), b (item difficulties), theta (person abilities).
struct ParameterPoint {
  std::vector<double> log_a;
  std::vector<double> b;
  std::vector<double> theta;

  int n_items() const { return static_cast<int>(log_a.size()); }
  int n_persons() const { return static_cast<int>(theta.size()); }
  int dim() const { return 2 * n_items() + n_persons(); }

  // Flat layout (log_a, b, theta), the order gradients are reported in.
  std::vector<double> to_flat() const;
  static ParameterPoint from_flat(const std::vector<double>& flat, int n_items, int n_persons);
};

// Prior scales, interpreted as standard deviations: Half-Normal(0, a_scale)
// on discriminations, Normal(0, b_scale) on difficulties, Normal(0,
// theta_scale) on abilities.
struct PriorConfig {
  double a_scale = 5.0;
  double b_scale = 5.0;
  double theta_scale = 5.0;

  void validate() const;
};

// P(success) = sigma(a * (theta - b)), sigma the standard logistic. Stable
// for |a*(theta-b)| up to 700 and beyond (saturates, never overflows).
// Higher ability raises the probability, higher difficulty lowers it.
double success_probability(double a, double b, double theta);

// Joint log density of data and parameters, up to constants:
//
//   sum_{i,p} [ y*log(pi) + (N-y)*log(1-pi) ]          pi = sigma(a_i (theta_p - b_i))
//   - sum_i a_i^2 / (2 a_scale^2)                      Half-Normal(0, a_scale) on a_i
//   - sum_i b_i^2 / (2 b_scale^2)                      Normal(0, b_scale)
//   - sum_p theta_p^2 / (2 theta_scale^2)              Normal(0, theta_scale)
//   + sum_i log_a_i                                    log-Jacobian of a = exp(log_a)
//
// Dropped (parameter-free, fixed convention): binomial coefficients
// log C(N, y); the Normal normalizers -log(scale) - log(2*pi)/2 per
// coordinate; the Half-Normal normalizers log(2) - log(a_scale) -
// log(2*pi)/2 per item. Cells with N = 0 contribute zero.
double log_posterior(const ParameterPoint& point, const ResponseMatrix& data,
                     const PriorConfig& priors);

// Analytic gradient of log_posterior with respect to (log_a, b, theta), in
// that concatenation order.
std::vector<double> grad_log_posterior(const ParameterPoint& point, const ResponseMatrix& data,
                                       const PriorConfig& priors);

// Draws y_{i,p} ~ Binomial(N_{i,p}, success_probability(a_i, b_i, theta_p))
// with a generator seeded from `seed`. Items are labeled i1..iI and persons
// p1..pP. Identical seed and inputs give identical output.
ResponseMatrix simulate_responses(const ParameterPoint& true_point,
                                  const std::vector<long>& attempts, std::uint64_t seed);

}  // namespace irtbench
