#include <doctest.h>

#include <cmath>
#include <sstream>

#include "irtbench/error.hpp"
#include "irtbench/sampler.hpp"
#include "test_support.hpp"

using namespace irtbench;

namespace {

ResponseMatrix zero_matrix(int ni, int np) {
  ResponseMatrix m;
  for (int i = 0; i < ni; ++i) m.items.push_back("i" + std::to_string(i + 1));
  for (int p = 0; p < np; ++p) m.persons.push_back("p" + std::to_string(p + 1));
  m.attempts.assign(static_cast<std::size_t>(ni) * np, 0);
  m.successes.assign(static_cast<std::size_t>(ni) * np, 0);
  return m;
}

SamplerConfig small_config(std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.chains = 2;
  cfg.draws_per_chain = 250;
  cfg.warmup = 200;
  cfg.master_seed = seed;
  return cfg;
}

PosteriorDraws synthetic_draws(const std::vector<double>& series) {
  PosteriorDraws d;
  d.parameter_names = {"x"};
  d.n_chains = 1;
  d.draws_per_chain = static_cast<int>(series.size());
  d.draws = series;
  d.divergent.assign(series.size(), 0);
  return d;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("sampling is bit-for-bit deterministic") {
  const auto m = zero_matrix(2, 2);
  const auto cfg = small_config(42);
  const auto d1 = sample(m, PriorConfig{}, cfg);
  const auto d2 = sample(m, PriorConfig{}, cfg);
  CHECK(d1.draws == d2.draws);
  CHECK(d1.divergent == d2.divergent);
  CHECK(d1.step_size == d2.step_size);
  const auto d3 = sample(m, PriorConfig{}, [&] {
    auto c = cfg;
    c.master_seed = 43;
    return c;
  }());
  CHECK(d1.draws != d3.draws);
}

TEST_CASE("prior-only fit recovers the prior spread") {
  auto cfg = small_config(7);
  cfg.chains = 4;
  cfg.draws_per_chain = 1200;
  cfg.warmup = 300;
  const auto draws = sample(zero_matrix(3, 2), PriorConfig{}, cfg);
  // parameter b[1] sits at index 3 (after a[1..3])
  const auto xs = draws.pooled(3);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / (static_cast<double>(xs.size()) - 1.0));
  CHECK(sd == doctest::Approx(5.0).epsilon(0.10));
  CHECK(std::abs(mean) < 0.5);
}

TEST_CASE("summarize pools chains and is invariant to chain order") {
  auto cfg = small_config(99);
  const auto draws = sample(zero_matrix(2, 2), PriorConfig{}, cfg);
  const auto summary = summarize(draws);
  REQUIRE(summary.parameters.size() == 6);

  PosteriorDraws permuted = draws;
  const std::size_t block = static_cast<std::size_t>(draws.draws_per_chain) * draws.dim();
  std::copy(draws.draws.begin(), draws.draws.begin() + block, permuted.draws.begin() + block);
  std::copy(draws.draws.begin() + block, draws.draws.end(), permuted.draws.begin());
  const auto summary2 = summarize(permuted);
  for (std::size_t k = 0; k < summary.parameters.size(); ++k) {
    CHECK(summary.parameters[k].median == summary2.parameters[k].median);
    CHECK(summary.parameters[k].ci90_lo == summary2.parameters[k].ci90_lo);
    CHECK(summary.parameters[k].ci90_hi == summary2.parameters[k].ci90_hi);
  }
}

TEST_CASE("summary intervals nest and bracket the median") {
  auto cfg = small_config(3);
  const auto summary = summarize(sample(zero_matrix(2, 3), PriorConfig{}, cfg));
  for (const auto& p : summary.parameters) {
    CHECK(p.ci90_lo <= p.ci50_lo);
    CHECK(p.ci50_lo <= p.median);
    CHECK(p.median <= p.ci50_hi);
    CHECK(p.ci50_hi <= p.ci90_hi);
    if (p.rhat) CHECK(*p.rhat >= 1.0 - 1e-3);
  }
}

TEST_CASE("all discrimination draws stay positive") {
  auto cfg = small_config(5);
  const auto draws = sample(zero_matrix(2, 2), PriorConfig{}, cfg);
  for (int param = 0; param < 2; ++param) {
    for (double v : draws.pooled(param)) CHECK(v > 0.0);
  }
}

TEST_CASE("summarize frozen quantiles on a known series") {
  std::vector<double> series;
  for (int k = 1; k <= 100; ++k) series.push_back(k);
  const auto s = summarize(synthetic_draws(series));
  REQUIRE(s.parameters.size() == 1);
  CHECK(s.parameters[0].median == doctest::Approx(50.5));
  CHECK(s.parameters[0].ci90_lo == doctest::Approx(5.95));
  CHECK(s.parameters[0].ci90_hi == doctest::Approx(95.05));
  CHECK(s.parameters[0].ci50_lo == doctest::Approx(25.75));
  CHECK(s.parameters[0].ci50_hi == doctest::Approx(75.25));
}

TEST_CASE("summarize reports degenerate parameters distinctly") {
  const auto s = summarize(synthetic_draws(std::vector<double>(128, 2.5)));
  CHECK(s.parameters[0].median == doctest::Approx(2.5));
  CHECK(s.parameters[0].ci50_lo == doctest::Approx(2.5));
  CHECK(s.parameters[0].ci90_hi == doctest::Approx(2.5));
  CHECK(!s.parameters[0].rhat.has_value());
  CHECK(!s.parameters[0].ess_bulk.has_value());
}

TEST_CASE("summarize requires enough draws") {
  CHECK_THROWS_AS(summarize(synthetic_draws(std::vector<double>(50, 1.0))),
                  std::invalid_argument);
}

TEST_CASE("dense metric sampling stays correct on the prior") {
  auto cfg = small_config(8);
  cfg.chains = 4;
  cfg.draws_per_chain = 1000;
  cfg.warmup = 300;
  cfg.metric = MetricType::dense;
  const auto draws = sample(zero_matrix(2, 2), PriorConfig{}, cfg);
  const auto xs = draws.pooled(2);  // b[1]
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  CHECK(std::sqrt(var / (xs.size() - 1.0)) == doctest::Approx(5.0).epsilon(0.12));
  CHECK(std::abs(mean) < 0.6);
  const auto again = sample(zero_matrix(2, 2), PriorConfig{}, cfg);
  CHECK(draws.draws == again.draws);
}

TEST_CASE("a smaller step size improves energy conservation") {
  const auto m = zero_matrix(2, 2);
  auto cfg = small_config(21);
  const auto base = sample(m, PriorConfig{}, cfg);
  cfg.post_warmup_step_scale = 0.1;
  const auto fine = sample(m, PriorConfig{}, cfg);
  for (int c = 0; c < cfg.chains; ++c) {
    CHECK(fine.mean_accept[c] > base.mean_accept[c]);
    CHECK(fine.step_size[c] == doctest::Approx(0.1 * base.step_size[c]));
  }
}

TEST_CASE("draws csv has one row per draw and a stable header") {
  auto cfg = small_config(31);
  cfg.chains = 2;
  cfg.draws_per_chain = 60;
  const auto draws = sample(zero_matrix(2, 2), PriorConfig{}, cfg);
  std::ostringstream out;
  draws.write_draws_csv(out);
  const std::string text = out.str();
  CHECK(text.rfind("chain,iteration,divergent,a[1],a[2],b[1],b[2],theta[1],theta[2]", 0) == 0);
  CHECK(test_support::count_occurrences(text, "\n") == 121);  // header + 2*60 rows
}

TEST_CASE("draws csv round trips") {
  auto cfg = small_config(47);
  cfg.chains = 2;
  cfg.draws_per_chain = 80;
  const auto draws = sample(zero_matrix(2, 2), PriorConfig{}, cfg);
  std::ostringstream out;
  draws.write_draws_csv(out);
  std::istringstream in(out.str());
  const auto back = PosteriorDraws::from_draws_csv(in);
  CHECK(back.parameter_names == draws.parameter_names);
  CHECK(back.n_chains == draws.n_chains);
  CHECK(back.draws_per_chain == draws.draws_per_chain);
  CHECK(back.draws == draws.draws);  // %.17g round trips doubles exactly
  CHECK(back.divergent == draws.divergent);
}

TEST_CASE("summary csv round trips including undefined diagnostics") {
  PosteriorSummary s;
  s.parameters.push_back({"a[1]", 1.5, 1.2, 1.8, 1.0, 2.0, 1.01, 350.0});
  s.parameters.push_back({"b[1]", -0.5, -0.7, -0.3, -1.0, 0.0, std::nullopt, std::nullopt});
  s.divergence_count = 0;
  std::ostringstream out;
  s.write_summary_csv(out);
  std::istringstream in(out.str());
  const auto back = PosteriorSummary::from_summary_csv(in);
  REQUIRE(back.parameters.size() == 2);
  CHECK(back.parameters[0].median == doctest::Approx(1.5));
  CHECK(back.parameters[0].rhat.has_value());
  CHECK(!back.parameters[1].rhat.has_value());
  CHECK(back.parameters[1].ci90_hi == doctest::Approx(0.0));
}

TEST_CASE("config validation") {
  SamplerConfig cfg;
  cfg.chains = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SamplerConfig{};
  cfg.target_accept = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SamplerConfig{};
  cfg.warmup = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("map estimate finds the prior mode on empty data") {
  const auto res = map_estimate(zero_matrix(2, 2), PriorConfig{}, 17, 5000);
  CHECK(res.converged);
  for (double b : res.point.b) CHECK(std::abs(b) < 1e-4);
  for (double t : res.point.theta) CHECK(std::abs(t) < 1e-4);
  // Half-Normal(0,5) with the exp reparameterization peaks at log(5)
  for (double la : res.point.log_a) CHECK(la == doctest::Approx(std::log(5.0)).epsilon(1e-3));
}

TEST_CASE("map estimate never loses ground") {
  Rng rng(23);
  auto c = test_support::random_model_case(rng, 4, 5);
  const auto res = map_estimate(c.data, PriorConfig{}, 29, 400);
  CHECK(res.final_log_posterior >= res.initial_log_posterior);
}

TEST_CASE("map estimate recovers ability ranks on synthetic data") {
  ParameterPoint truth;
  Rng rng(31);
  const int ni = 20, np = 15;
  for (int i = 0; i < ni; ++i) {
    truth.log_a.push_back(std::log(rng.uniform(0.5, 3.0)));
    truth.b.push_back(rng.uniform(-2.0, 2.0));
  }
  for (int p = 0; p < np; ++p) truth.theta.push_back(rng.uniform(-2.0, 2.0));
  const auto data = simulate_responses(truth, std::vector<long>(ni * np, 25), 313);
  const auto res = map_estimate(data, PriorConfig{}, 37, 3000);
  CHECK(test_support::spearman(truth.theta, res.point.theta) >= 0.9);
}

}  // TEST_SUITE
