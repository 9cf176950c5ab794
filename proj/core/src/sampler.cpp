#include "irtbench/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "irtbench/csv.hpp"
#include "irtbench/diagnostics.hpp"
#include "irtbench/error.hpp"
#include "irtbench/rng.hpp"

namespace irtbench {

namespace {

constexpr double kGradNormTol = 1e-6;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Target density plumbing

struct Target {
  const ResponseMatrix& data;
  const PriorConfig& priors;
  int n_items;
  int n_persons;
  int dim;

  Target(const ResponseMatrix& d, const PriorConfig& pr)
      : data(d), priors(pr), n_items(d.n_items()), n_persons(d.n_persons()),
        dim(2 * d.n_items() + d.n_persons()) {}

  double logp(const std::vector<double>& q) const {
    for (double v : q) {
      if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
    }
    return log_posterior(ParameterPoint::from_flat(q, n_items, n_persons), data, priors);
  }

  std::vector<double> grad(const std::vector<double>& q) const {
    return grad_log_posterior(ParameterPoint::from_flat(q, n_items, n_persons), data, priors);
  }
};

struct PhaseState {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;
  double logp = 0.0;
};

// Mass matrix with the estimated posterior covariance as its inverse.
// Diagonal mode stores variances; dense mode stores the full covariance and
// its Cholesky factor. Momenta are drawn from N(0, inverse covariance).
struct Metric {
  MetricType type;
  int dim;
  std::vector<double> inv;    // diagonal variances
  std::vector<double> sigma;  // dense covariance, row-major
  std::vector<double> chol;   // lower Cholesky factor of sigma

  Metric(int d, MetricType t) : type(t), dim(d), inv(d, 1.0) {
    if (type == MetricType::dense) {
      sigma.assign(static_cast<std::size_t>(d) * d, 0.0);
      for (int i = 0; i < d; ++i) sigma[static_cast<std::size_t>(i) * d + i] = 1.0;
      factorize();
    }
  }

  void set_diagonal(const std::vector<double>& variances) { inv = variances; }

  void set_dense(std::vector<double> covariance) {
    sigma = std::move(covariance);
    factorize();
  }

  void factorize() {
    chol.assign(sigma.size(), 0.0);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = sigma[static_cast<std::size_t>(i) * dim + j];
        for (int k = 0; k < j; ++k) {
          s -= chol[static_cast<std::size_t>(i) * dim + k] * chol[static_cast<std::size_t>(j) * dim + k];
        }
        if (i == j) {
          if (!(s > 0.0)) throw NumericError("sampler: warmup covariance is not positive definite");
          chol[static_cast<std::size_t>(i) * dim + i] = std::sqrt(s);
        } else {
          chol[static_cast<std::size_t>(i) * dim + j] = s / chol[static_cast<std::size_t>(j) * dim + j];
        }
      }
    }
  }

  // v = inverse-mass * p, the velocity used by the position update and the
  // u-turn test.
  void velocity(const std::vector<double>& p, std::vector<double>& v) const {
    v.resize(p.size());
    if (type == MetricType::diagonal) {
      for (int d = 0; d < dim; ++d) v[d] = inv[d] * p[d];
      return;
    }
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += sigma[static_cast<std::size_t>(i) * dim + j] * p[j];
      v[i] = s;
    }
  }

  double kinetic(const std::vector<double>& p) const {
    if (type == MetricType::diagonal) {
      double t = 0.0;
      for (int d = 0; d < dim; ++d) t += inv[d] * p[d] * p[d];
      return 0.5 * t;
    }
    // 0.5 * |L^T p|^2
    double t = 0.0;
    for (int i = 0; i < dim; ++i) {
      double u = 0.0;
      for (int j = i; j < dim; ++j) u += chol[static_cast<std::size_t>(j) * dim + i] * p[j];
      t += u * u;
    }
    return 0.5 * t;
  }

  void sample_momentum(std::vector<double>& p, Rng& rng) const {
    p.resize(dim);
    if (type == MetricType::diagonal) {
      for (int d = 0; d < dim; ++d) p[d] = rng.standard_normal() / std::sqrt(inv[d]);
      return;
    }
    // p = L^{-T} z gives Cov(p) = (L L^T)^{-1}
    std::vector<double> z(dim);
    for (int d = 0; d < dim; ++d) z[d] = rng.standard_normal();
    for (int i = dim - 1; i >= 0; --i) {
      double s = z[i];
      for (int j = i + 1; j < dim; ++j) s -= chol[static_cast<std::size_t>(j) * dim + i] * p[j];
      p[i] = s / chol[static_cast<std::size_t>(i) * dim + i];
    }
  }
};

double hamiltonian(const PhaseState& s, const Metric& metric) {
  return -s.logp + metric.kinetic(s.p);
}

void leapfrog(PhaseState& s, double eps, int dir, const Target& target, const Metric& metric) {
  const double h = eps * dir;
  for (std::size_t d = 0; d < s.q.size(); ++d) s.p[d] += 0.5 * h * s.grad[d];
  std::vector<double> v;
  metric.velocity(s.p, v);
  for (std::size_t d = 0; d < s.q.size(); ++d) s.q[d] += h * v[d];
  s.logp = target.logp(s.q);
  if (std::isfinite(s.logp)) {
    s.grad = target.grad(s.q);
    for (double g : s.grad) {
      if (!std::isfinite(g)) {
        s.logp = -std::numeric_limits<double>::infinity();
        break;
      }
    }
  }
  if (std::isfinite(s.logp)) {
    for (std::size_t d = 0; d < s.q.size(); ++d) s.p[d] += 0.5 * h * s.grad[d];
  }
}

bool no_uturn(const PhaseState& minus, const PhaseState& plus, const Metric& metric) {
  std::vector<double> v_minus, v_plus;
  metric.velocity(minus.p, v_minus);
  metric.velocity(plus.p, v_plus);
  double dot_minus = 0.0, dot_plus = 0.0;
  for (std::size_t d = 0; d < minus.q.size(); ++d) {
    const double dq = plus.q[d] - minus.q[d];
    dot_minus += dq * v_minus[d];
    dot_plus += dq * v_plus[d];
  }
  return dot_minus > 0.0 && dot_plus > 0.0;
}

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ---------------------------------------------------------------------------
// Multinomial NUTS transition

struct Tree {
  PhaseState minus;   // backward end
  PhaseState plus;    // forward end
  std::vector<double> proposal;
  double log_sum_weight = -std::numeric_limits<double>::infinity();
  double alpha_sum = 0.0;  // sum of per-step acceptance statistics
  int n_alpha = 0;
  bool divergent = false;
  bool valid = false;
};

struct NutsContext {
  const Target& target;
  const Metric& metric;
  Rng& rng;
  double eps;
  double h0;
  double divergence_threshold;
};

Tree build_tree(NutsContext& ctx, const PhaseState& from, int dir, int depth) {
  if (depth == 0) {
    Tree leaf;
    PhaseState s = from;
    leapfrog(s, ctx.eps, dir, ctx.target, ctx.metric);
    const double h = hamiltonian(s, ctx.metric);
    const double delta = h - ctx.h0;  // energy error relative to trajectory start
    leaf.n_alpha = 1;
    if (!std::isfinite(h) || delta > ctx.divergence_threshold) {
      leaf.divergent = true;
      leaf.valid = false;
      leaf.alpha_sum = 0.0;
      leaf.minus = leaf.plus = s;
      return leaf;
    }
    leaf.alpha_sum = std::min(1.0, std::exp(-delta));
    leaf.minus = s;
    leaf.plus = s;
    leaf.proposal = s.q;
    leaf.log_sum_weight = -delta;
    leaf.valid = true;
    return leaf;
  }

  Tree first = build_tree(ctx, from, dir, depth - 1);
  if (!first.valid) return first;

  const PhaseState& grow_from = (dir == 1) ? first.plus : first.minus;
  Tree second = build_tree(ctx, grow_from, dir, depth - 1);
  first.alpha_sum += second.alpha_sum;
  first.n_alpha += second.n_alpha;
  if (!second.valid) {
    first.divergent = first.divergent || second.divergent;
    first.valid = false;
    return first;
  }

  const double total = log_add_exp(first.log_sum_weight, second.log_sum_weight);
  if (std::log(ctx.rng.uniform01()) < second.log_sum_weight - total) {
    first.proposal = second.proposal;
  }
  first.log_sum_weight = total;
  if (dir == 1) first.plus = second.plus;
  else first.minus = second.minus;
  first.valid = no_uturn(first.minus, first.plus, ctx.metric);
  return first;
}

struct TransitionResult {
  bool divergent = false;
  double accept_stat = 0.0;
};

TransitionResult nuts_transition(PhaseState& state, NutsContext& ctx, int max_depth) {
  ctx.metric.sample_momentum(state.p, ctx.rng);
  ctx.h0 = hamiltonian(state, ctx.metric);

  Tree traj;
  traj.minus = state;
  traj.plus = state;
  traj.proposal = state.q;
  traj.log_sum_weight = 0.0;
  traj.valid = true;

  TransitionResult result;
  double alpha_sum = 0.0;
  int n_alpha = 0;

  for (int depth = 0; depth < max_depth; ++depth) {
    const int dir = ctx.rng.uniform01() < 0.5 ? -1 : 1;
    const PhaseState& from = (dir == 1) ? traj.plus : traj.minus;
    Tree subtree = build_tree(ctx, from, dir, depth);
    alpha_sum += subtree.alpha_sum;
    n_alpha += subtree.n_alpha;
    if (!subtree.valid) {
      result.divergent = result.divergent || subtree.divergent;
      break;
    }
    // Biased progressive sampling: the fresh subtree is favored, which
    // lengthens the effective jump along the trajectory.
    if (std::log(ctx.rng.uniform01()) < subtree.log_sum_weight - traj.log_sum_weight) {
      traj.proposal = subtree.proposal;
    }
    traj.log_sum_weight = log_add_exp(traj.log_sum_weight, subtree.log_sum_weight);
    if (dir == 1) traj.plus = subtree.plus;
    else traj.minus = subtree.minus;
    if (!no_uturn(traj.minus, traj.plus, ctx.metric)) break;
  }

  state.q = traj.proposal;
  state.logp = ctx.target.logp(state.q);
  state.grad = ctx.target.grad(state.q);
  result.accept_stat = n_alpha > 0 ? alpha_sum / n_alpha : 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// Warmup adaptation

// Nesterov dual averaging of log(eps) toward a target acceptance statistic.
struct DualAveraging {
  double mu = 0.0;
  double log_eps = 0.0;
  double log_eps_bar = 0.0;
  double h_bar = 0.0;
  int count = 0;
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;

  void restart(double eps) {
    mu = std::log(10.0 * eps);
    log_eps = std::log(eps);
    log_eps_bar = 0.0;
    h_bar = 0.0;
    count = 0;
  }
  void update(double accept_stat, double target) {
    ++count;
    const double m = static_cast<double>(count);
    h_bar = (1.0 - 1.0 / (m + kT0)) * h_bar + (target - accept_stat) / (m + kT0);
    log_eps = mu - std::sqrt(m) / kGamma * h_bar;
    const double eta = std::pow(m, -kKappa);
    log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
  }
  double eps() const { return std::exp(log_eps); }
  double eps_final() const { return std::exp(log_eps_bar); }
};

struct Welford {
  int dim;
  bool dense;
  std::vector<double> mean;
  std::vector<double> m2;  // dim entries (diagonal) or dim*dim (dense)
  long count = 0;

  Welford(int d, bool dense_mode)
      : dim(d), dense(dense_mode), mean(d, 0.0),
        m2(dense_mode ? static_cast<std::size_t>(d) * d : static_cast<std::size_t>(d), 0.0) {}

  void add(const std::vector<double>& x) {
    ++count;
    std::vector<double> delta(dim);
    for (int d = 0; d < dim; ++d) {
      delta[d] = x[d] - mean[d];
      mean[d] += delta[d] / static_cast<double>(count);
    }
    if (!dense) {
      for (int d = 0; d < dim; ++d) m2[d] += delta[d] * (x[d] - mean[d]);
      return;
    }
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double upd = delta[i] * (x[j] - mean[j]);
        m2[static_cast<std::size_t>(i) * dim + j] += upd;
        if (i != j) m2[static_cast<std::size_t>(j) * dim + i] += upd;
      }
    }
  }

  // Regularized variance estimate (shrunk toward unit scale on thin windows).
  std::vector<double> regularized_variance() const {
    std::vector<double> v(dim, 1.0);
    if (count < 2) return v;
    const double n = static_cast<double>(count);
    for (int d = 0; d < dim; ++d) {
      const double var = m2[d] / (n - 1.0);
      v[d] = n / (n + 5.0) * var + 1e-3 * (5.0 / (n + 5.0));
    }
    return v;
  }

  std::vector<double> regularized_covariance() const {
    std::vector<double> cov(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) cov[static_cast<std::size_t>(i) * dim + i] = 1.0;
    if (count < 2) return cov;
    const double n = static_cast<double>(count);
    const double shrink = n / (n + 5.0);
    for (std::size_t k = 0; k < cov.size(); ++k) cov[k] = shrink * m2[k] / (n - 1.0);
    for (int i = 0; i < dim; ++i) cov[static_cast<std::size_t>(i) * dim + i] += 1e-3 * (5.0 / (n + 5.0));
    return cov;
  }
};

// Warmup layout: initial fast interval (step size only), doubling slow
// windows (mass matrix), final fast interval. Fractions 15% / 10% with a
// base slow window of 25; the last slow window absorbs the remainder.
struct WarmupSchedule {
  int fast_start = 0;
  std::vector<int> slow_window_ends;  // iteration indices where mass updates fire

  explicit WarmupSchedule(int warmup) {
    if (warmup < 20) {
      fast_start = warmup;  // too short for windowed adaptation
      return;
    }
    fast_start = static_cast<int>(0.15 * warmup);
    const int term = static_cast<int>(0.10 * warmup);
    int remaining = warmup - fast_start - term;
    int window = 25;
    int pos = fast_start;
    while (remaining > 0) {
      int size = std::min(window, remaining);
      if (remaining - size < 2 * size) size = remaining;  // absorb the tail
      pos += size;
      remaining -= size;
      slow_window_ends.push_back(pos);
      window *= 2;
    }
  }

  bool in_slow(int iter) const {
    return !slow_window_ends.empty() && iter >= fast_start && iter < slow_window_ends.back();
  }
  bool window_end(int iter) const {
    return std::find(slow_window_ends.begin(), slow_window_ends.end(), iter + 1) !=
           slow_window_ends.end();
  }
};

double find_initial_step_size(const Target& target, const Metric& metric, const PhaseState& init,
                              Rng& rng) {
  double eps = 1.0;
  PhaseState s = init;
  metric.sample_momentum(s.p, rng);
  const double h0 = hamiltonian(s, metric);

  auto energy_drop = [&](double step) {
    PhaseState t = s;
    leapfrog(t, step, 1, target, metric);
    const double h = hamiltonian(t, metric);
    return std::isfinite(h) ? h0 - h : -std::numeric_limits<double>::infinity();
  };

  double drop = energy_drop(eps);
  const double direction = drop > std::log(0.5) ? 1.0 : -1.0;
  for (int it = 0; it < 100; ++it) {
    if (direction > 0 && !(drop > std::log(0.5))) break;
    if (direction < 0 && !(drop < std::log(0.5))) break;
    eps *= direction > 0 ? 2.0 : 0.5;
    if (eps > 1e7 || eps < 1e-10) break;
    drop = energy_drop(eps);
  }
  return std::clamp(eps, 1e-10, 1e7);
}

int max_tree_depth(int max_leapfrog_steps) {
  int depth = 0;
  while ((1 << (depth + 1)) <= max_leapfrog_steps && depth < 20) ++depth;
  return std::max(1, depth);
}

struct ChainOutput {
  std::vector<double> draws;           // draws_per_chain x dim, constrained scale
  std::vector<std::uint8_t> divergent;
  double step_size = 0.0;
  double mean_accept = 0.0;
};

ChainOutput run_chain(const Target& target, const SamplerConfig& config, std::uint64_t chain_seed) {
  Rng rng(chain_seed);
  const int dim = target.dim;
  const int max_depth = max_tree_depth(config.max_leapfrog_steps);

  PhaseState state;
  state.q.assign(dim, 0.0);
  bool initialized = false;
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int d = 0; d < dim; ++d) state.q[d] = rng.uniform(-2.0, 2.0);
    state.logp = target.logp(state.q);
    if (std::isfinite(state.logp)) {
      initialized = true;
      break;
    }
  }
  if (!initialized) {
    throw NumericError("sampler: failed to find a finite starting point after 100 draws");
  }
  state.grad = target.grad(state.q);

  const bool dense = config.metric == MetricType::dense;
  Metric metric(dim, config.metric);
  WarmupSchedule schedule(config.warmup);
  double eps = find_initial_step_size(target, metric, state, rng);
  DualAveraging da;
  da.restart(eps);
  Welford welford(dim, dense);

  NutsContext ctx{target, metric, rng, eps, 0.0, config.divergence_energy_threshold};

  for (int iter = 0; iter < config.warmup; ++iter) {
    ctx.eps = da.eps();
    const TransitionResult res = nuts_transition(state, ctx, max_depth);
    da.update(res.accept_stat, config.target_accept);
    if (schedule.in_slow(iter)) {
      welford.add(state.q);
      if (schedule.window_end(iter)) {
        if (dense) metric.set_dense(welford.regularized_covariance());
        else metric.set_diagonal(welford.regularized_variance());
        welford = Welford(dim, dense);
        eps = find_initial_step_size(target, metric, state, rng);
        da.restart(eps);
      }
    }
  }

  const double frozen_eps =
      (config.warmup > 0 ? da.eps_final() : eps) * config.post_warmup_step_scale;
  ctx.eps = frozen_eps;

  ChainOutput out;
  out.step_size = frozen_eps;
  out.draws.reserve(static_cast<std::size_t>(config.draws_per_chain) * dim);
  out.divergent.resize(config.draws_per_chain, 0);
  double accept_sum = 0.0;
  for (int d = 0; d < config.draws_per_chain; ++d) {
    const TransitionResult res = nuts_transition(state, ctx, max_depth);
    out.divergent[d] = res.divergent ? 1 : 0;
    accept_sum += res.accept_stat;
    for (int i = 0; i < target.n_items; ++i) out.draws.push_back(std::exp(state.q[i]));
    for (int k = target.n_items; k < dim; ++k) out.draws.push_back(state.q[k]);
  }
  out.mean_accept = accept_sum / config.draws_per_chain;
  return out;
}

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1) throw InputError("sampler: chains must be >= 1");
  if (draws_per_chain < 1) throw InputError("sampler: draws_per_chain must be >= 1");
  if (warmup < 1) throw InputError("sampler: warmup must be >= 1");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw InputError("sampler: target_accept must be in (0,1)");
  }
  if (max_leapfrog_steps < 1) throw InputError("sampler: max_leapfrog_steps must be >= 1");
  if (!(divergence_energy_threshold > 0.0)) {
    throw InputError("sampler: divergence_energy_threshold must be positive");
  }
  if (!(post_warmup_step_scale > 0.0)) {
    throw InputError("sampler: post_warmup_step_scale must be positive");
  }
}

std::vector<std::string> make_parameter_names(int n_items, int n_persons) {
  std::vector<std::string> names;
  names.reserve(2 * n_items + n_persons);
  for (int i = 0; i < n_items; ++i) names.push_back("a[" + std::to_string(i + 1) + "]");
  for (int i = 0; i < n_items; ++i) names.push_back("b[" + std::to_string(i + 1) + "]");
  for (int p = 0; p < n_persons; ++p) names.push_back("theta[" + std::to_string(p + 1) + "]");
  return names;
}

PosteriorDraws sample(const ResponseMatrix& data, const PriorConfig& priors,
                      const SamplerConfig& config) {
  config.validate();
  priors.validate();
  const Target target(data, priors);
  if (target.dim > 10000) throw InputError("sampler: model exceeds 10^4 parameters");

  std::vector<std::future<ChainOutput>> futures;
  futures.reserve(config.chains);
  for (int c = 0; c < config.chains; ++c) {
    const std::uint64_t chain_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(c));
    futures.push_back(std::async(std::launch::async,
                                 [&target, &config, chain_seed] { return run_chain(target, config, chain_seed); }));
  }

  PosteriorDraws out;
  out.parameter_names = make_parameter_names(target.n_items, target.n_persons);
  out.n_chains = config.chains;
  out.draws_per_chain = config.draws_per_chain;
  out.seed_used = config.master_seed;
  out.draws.reserve(static_cast<std::size_t>(config.chains) * config.draws_per_chain * target.dim);
  for (auto& f : futures) {
    ChainOutput chain = f.get();  // merged in chain order, so execution order is irrelevant
    out.draws.insert(out.draws.end(), chain.draws.begin(), chain.draws.end());
    out.divergent.insert(out.divergent.end(), chain.divergent.begin(), chain.divergent.end());
    out.step_size.push_back(chain.step_size);
    out.mean_accept.push_back(chain.mean_accept);
  }
  return out;
}

long PosteriorDraws::divergence_count() const {
  long n = 0;
  for (auto d : divergent) n += d;
  return n;
}

std::vector<std::vector<double>> PosteriorDraws::chain_series(int param) const {
  std::vector<std::vector<double>> series(n_chains);
  for (int c = 0; c < n_chains; ++c) {
    series[c].reserve(draws_per_chain);
    for (int d = 0; d < draws_per_chain; ++d) series[c].push_back(value(c, d, param));
  }
  return series;
}

std::vector<double> PosteriorDraws::pooled(int param) const {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n_chains) * draws_per_chain);
  for (int c = 0; c < n_chains; ++c) {
    for (int d = 0; d < draws_per_chain; ++d) xs.push_back(value(c, d, param));
  }
  return xs;
}

void PosteriorDraws::write_draws_csv(std::ostream& out) const {
  std::vector<std::string> header = {"chain", "iteration", "divergent"};
  header.insert(header.end(), parameter_names.begin(), parameter_names.end());
  write_csv_row(out, header);
  for (int c = 0; c < n_chains; ++c) {
    for (int d = 0; d < draws_per_chain; ++d) {
      std::vector<std::string> row;
      row.reserve(3 + dim());
      row.push_back(std::to_string(c + 1));
      row.push_back(std::to_string(d + 1));
      row.push_back(is_divergent(c, d) ? "1" : "0");
      for (int k = 0; k < dim(); ++k) row.push_back(format_double(value(c, d, k)));
      write_csv_row(out, row);
    }
  }
}

PosteriorDraws PosteriorDraws::from_draws_csv(std::istream& in) {
  const auto rows = read_csv(in);
  if (rows.size() < 2) throw InputError("draws csv: no data rows");
  const auto& header = rows.front();
  if (header.size() < 4 || header[0] != "chain" || header[1] != "iteration" ||
      header[2] != "divergent") {
    throw InputError("draws csv: expected header chain,iteration,divergent,<parameters...>");
  }
  PosteriorDraws d;
  d.parameter_names.assign(header.begin() + 3, header.end());
  const int dim = d.dim();

  int max_chain = 0, max_iter = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) throw InputError("draws csv: malformed row");
    try {
      max_chain = std::max(max_chain, std::stoi(row[0]));
      max_iter = std::max(max_iter, std::stoi(row[1]));
    } catch (const std::exception&) {
      throw InputError("draws csv: non-numeric chain/iteration");
    }
  }
  if (static_cast<std::size_t>(max_chain) * max_iter != rows.size() - 1) {
    throw InputError("draws csv: rows do not form a full chains x iterations grid");
  }
  d.n_chains = max_chain;
  d.draws_per_chain = max_iter;
  d.draws.assign(static_cast<std::size_t>(max_chain) * max_iter * dim, 0.0);
  d.divergent.assign(static_cast<std::size_t>(max_chain) * max_iter, 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    try {
      const int chain = std::stoi(row[0]) - 1;
      const int iter = std::stoi(row[1]) - 1;
      const std::size_t cell = static_cast<std::size_t>(chain) * max_iter + iter;
      d.divergent[cell] = row[2] == "1" ? 1 : 0;
      for (int k = 0; k < dim; ++k) d.draws[cell * dim + k] = std::stod(row[3 + k]);
    } catch (const std::exception&) {
      throw InputError("draws csv: non-numeric draw value");
    }
  }
  return d;
}

PosteriorSummary summarize(const PosteriorDraws& draws) {
  if (static_cast<long>(draws.n_chains) * draws.draws_per_chain < 100) {
    throw std::invalid_argument("summarize: need at least 100 pooled draws");
  }
  PosteriorSummary summary;
  summary.divergence_count = draws.divergence_count();
  for (int k = 0; k < draws.dim(); ++k) {
    ParameterSummary ps;
    ps.name = draws.parameter_names[k];
    std::vector<double> xs = draws.pooled(k);
    std::sort(xs.begin(), xs.end());
    ps.median = quantile_sorted(xs, 0.5);
    ps.ci50_lo = quantile_sorted(xs, 0.25);
    ps.ci50_hi = quantile_sorted(xs, 0.75);
    ps.ci90_lo = quantile_sorted(xs, 0.05);
    ps.ci90_hi = quantile_sorted(xs, 0.95);
    const auto series = draws.chain_series(k);
    ps.rhat = split_rhat(series);
    ps.ess_bulk = ess_bulk(series);
    summary.parameters.push_back(std::move(ps));
  }
  return summary;
}

const ParameterSummary* PosteriorSummary::find(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void PosteriorSummary::write_summary_csv(std::ostream& out) const {
  write_csv_row(out, {"parameter", "median", "ci50_lo", "ci50_hi", "ci90_lo", "ci90_hi", "rhat",
                      "ess_bulk"});
  for (const auto& p : parameters) {
    write_csv_row(out, {p.name, format_double(p.median), format_double(p.ci50_lo),
                        format_double(p.ci50_hi), format_double(p.ci90_lo), format_double(p.ci90_hi),
                        p.rhat ? format_double(*p.rhat) : "undefined",
                        p.ess_bulk ? format_double(*p.ess_bulk) : "undefined"});
  }
}

PosteriorSummary PosteriorSummary::from_summary_csv(std::istream& in) {
  auto rows = read_csv(in);
  if (rows.empty()) throw InputError("summary csv: empty input");
  const std::vector<std::string> expected = {"parameter", "median", "ci50_lo", "ci50_hi",
                                             "ci90_lo", "ci90_hi", "rhat", "ess_bulk"};
  if (rows.front() != expected) throw InputError("summary csv: unexpected header");
  PosteriorSummary s;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != expected.size()) throw InputError("summary csv: malformed row");
    ParameterSummary p;
    p.name = row[0];
    try {
      p.median = std::stod(row[1]);
      p.ci50_lo = std::stod(row[2]);
      p.ci50_hi = std::stod(row[3]);
      p.ci90_lo = std::stod(row[4]);
      p.ci90_hi = std::stod(row[5]);
      if (row[6] != "undefined") p.rhat = std::stod(row[6]);
      if (row[7] != "undefined") p.ess_bulk = std::stod(row[7]);
    } catch (const std::exception&) {
      throw InputError("summary csv: non-numeric value in row for " + p.name);
    }
    s.parameters.push_back(std::move(p));
  }
  return s;
}

PosteriorSummary PosteriorSummary::from_summary_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  return from_summary_csv(in);
}

MapResult map_estimate(const ResponseMatrix& data, const PriorConfig& priors, std::uint64_t seed,
                       int max_iterations) {
  priors.validate();
  if (max_iterations < 1) throw InputError("map_estimate: max_iterations must be >= 1");
  const Target target(data, priors);

  Rng rng(seed);
  std::vector<double> x(target.dim);
  for (auto& v : x) v = rng.uniform(-2.0, 2.0);

  MapResult result;
  double fx = target.logp(x);
  if (!std::isfinite(fx)) throw NumericError("map_estimate: non-finite objective at initialization");
  result.initial_log_posterior = fx;

  double step = 1.0;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const std::vector<double> g = target.grad(x);
    double gmax = 0.0, gsq = 0.0;
    for (double v : g) {
      gmax = std::max(gmax, std::abs(v));
      gsq += v * v;
    }
    if (gmax < kGradNormTol) {
      result.converged = true;
      break;
    }

    // Backtracking Armijo line search along the gradient; the initial step
    // grows so flat prior-only objectives still converge quickly.
    step = std::min(step * 2.0, 1024.0);
    bool moved = false;
    std::vector<double> trial(x.size());
    while (step > 1e-18) {
      for (std::size_t d = 0; d < x.size(); ++d) trial[d] = x[d] + step * g[d];
      const double ft = target.logp(trial);
      if (std::isfinite(ft) && ft >= fx + 1e-4 * step * gsq) {
        x = trial;
        fx = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // line search exhausted; gradient direction unusable
  }

  result.point = ParameterPoint::from_flat(x, target.n_items, target.n_persons);
  result.iterations = iter;
  result.final_log_posterior = fx;
  return result;
}

}  // namespace irtbench
