#include "irtbench/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "irtbench/error.hpp"
#include "irtbench/rng.hpp"

namespace irtbench {

namespace {

// log sigma(x), stable on the whole real line.
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_dims(const ParameterPoint& point, const ResponseMatrix& data) {
  if (point.log_a.size() != data.items.size() || point.b.size() != data.items.size() ||
      point.theta.size() != data.persons.size()) {
    throw std::invalid_argument("parameter point dimensions do not match response matrix");
  }
}

}  // namespace

std::vector<double> ParameterPoint::to_flat() const {
  std::vector<double> flat;
  flat.reserve(dim());
  flat.insert(flat.end(), log_a.begin(), log_a.end());
  flat.insert(flat.end(), b.begin(), b.end());
  flat.insert(flat.end(), theta.begin(), theta.end());
  return flat;
}

ParameterPoint ParameterPoint::from_flat(const std::vector<double>& flat, int n_items, int n_persons) {
  if (static_cast<int>(flat.size()) != 2 * n_items + n_persons) {
    throw std::invalid_argument("flat vector length does not match 2*items + persons");
  }
  ParameterPoint p;
  p.log_a.assign(flat.begin(), flat.begin() + n_items);
  p.b.assign(flat.begin() + n_items, flat.begin() + 2 * n_items);
  p.theta.assign(flat.begin() + 2 * n_items, flat.end());
  return p;
}

void PriorConfig::validate() const {
  if (!(a_scale > 0.0) || !(b_scale > 0.0) || !(theta_scale > 0.0)) {
    throw InputError("prior scales must be positive");
  }
}

double success_probability(double a, double b, double theta) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(theta)) {
    throw std::domain_error("success_probability: non-finite input");
  }
  if (!(a > 0.0)) throw std::domain_error("success_probability: discrimination must be positive");
  return sigmoid(a * (theta - b));
}

double log_posterior(const ParameterPoint& point, const ResponseMatrix& data,
                     const PriorConfig& priors) {
  check_dims(point, data);
  priors.validate();

  const int ni = point.n_items();
  const int np = point.n_persons();

  double lp = 0.0;
  for (int i = 0; i < ni; ++i) {
    const double a = std::exp(point.log_a[i]);
    const double b = point.b[i];
    for (int p = 0; p < np; ++p) {
      const long n = data.attempts[data.idx(i, p)];
      if (n == 0) continue;
      const long y = data.successes[data.idx(i, p)];
      const double z = a * (point.theta[p] - b);
      lp += static_cast<double>(y) * log_sigmoid(z) + static_cast<double>(n - y) * log_sigmoid(-z);
    }
  }
  for (int i = 0; i < ni; ++i) {
    const double a = std::exp(point.log_a[i]);
    lp += -a * a / (2.0 * priors.a_scale * priors.a_scale);
    lp += -point.b[i] * point.b[i] / (2.0 * priors.b_scale * priors.b_scale);
    lp += point.log_a[i];  // Jacobian of a = exp(log_a)
  }
  for (int p = 0; p < np; ++p) {
    lp += -point.theta[p] * point.theta[p] / (2.0 * priors.theta_scale * priors.theta_scale);
  }
  return lp;
}

std::vector<double> grad_log_posterior(const ParameterPoint& point, const ResponseMatrix& data,
                                       const PriorConfig& priors) {
  check_dims(point, data);
  priors.validate();

  const int ni = point.n_items();
  const int np = point.n_persons();
  std::vector<double> grad(2 * ni + np, 0.0);

  for (int i = 0; i < ni; ++i) {
    const double a = std::exp(point.log_a[i]);
    const double b = point.b[i];
    for (int p = 0; p < np; ++p) {
      const long n = data.attempts[data.idx(i, p)];
      if (n == 0) continue;
      const long y = data.successes[data.idx(i, p)];
      const double z = a * (point.theta[p] - b);
      // d/dz of the cell log likelihood is y - N*pi.
      const double resid = static_cast<double>(y) - static_cast<double>(n) * sigmoid(z);
      grad[i] += resid * z;            // dz/dlog_a = z
      grad[ni + i] += resid * (-a);    // dz/db = -a
      grad[2 * ni + p] += resid * a;   // dz/dtheta = a
    }
  }
  for (int i = 0; i < ni; ++i) {
    const double a = std::exp(point.log_a[i]);
    grad[i] += -a * a / (priors.a_scale * priors.a_scale) + 1.0;
    grad[ni + i] += -point.b[i] / (priors.b_scale * priors.b_scale);
  }
  for (int p = 0; p < np; ++p) {
    grad[2 * ni + p] += -point.theta[p] / (priors.theta_scale * priors.theta_scale);
  }
  return grad;
}

ResponseMatrix simulate_responses(const ParameterPoint& true_point,
                                  const std::vector<long>& attempts, std::uint64_t seed) {
  const int ni = true_point.n_items();
  const int np = true_point.n_persons();
  if (static_cast<int>(attempts.size()) != ni * np) {
    throw std::invalid_argument("attempts grid size does not match items x persons");
  }

  ResponseMatrix m;
  for (int i = 0; i < ni; ++i) m.items.push_back("i" + std::to_string(i + 1));
  for (int p = 0; p < np; ++p) m.persons.push_back("p" + std::to_string(p + 1));
  m.attempts = attempts;
  m.successes.assign(attempts.size(), 0);

  Rng rng(seed);
  for (int i = 0; i < ni; ++i) {
    const double a = std::exp(true_point.log_a[i]);
    for (int p = 0; p < np; ++p) {
      const std::size_t k = m.idx(i, p);
      if (m.attempts[k] < 0) throw std::invalid_argument("attempts must be non-negative");
      const double pi = success_probability(a, true_point.b[i], true_point.theta[p]);
      m.successes[k] = rng.binomial(m.attempts[k], pi);
    }
  }
  return m;
}

}  // namespace irtbench
