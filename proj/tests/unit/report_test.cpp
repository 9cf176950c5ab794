#include <doctest.h>

#include <optional>
#include <vector>

#include "irtbench/error.hpp"
#include "irtbench/report.hpp"
#include "irtbench/rng.hpp"
#include "test_support.hpp"

using namespace irtbench;
using test_support::count_occurrences;
using test_support::xml_well_formed;

namespace {

std::vector<ParameterSummary> three_params() {
  return {{"b[1]", 0.5, 0.2, 0.8, -0.1, 1.1, 1.01, 900.0},
          {"b[2]", -1.0, -1.3, -0.7, -1.8, -0.2, 1.00, 1200.0},
          {"b[3]", 2.0, 1.9, 2.1, 1.7, 2.3, 1.02, 800.0}};
}

InformationCurve flat_curve(double value) {
  InformationCurve c;
  c.kind = CurveKind::test_info;
  for (int k = 0; k <= 40; ++k) {
    c.grid.push_back(-4.0 + 0.2 * k);
    c.values.push_back(value);
  }
  return c;
}

PosteriorDraws tiny_draws(int chains, int draws_per_chain, bool with_divergence) {
  PosteriorDraws d;
  d.parameter_names = {"a[1]", "b[1]"};
  d.n_chains = chains;
  d.draws_per_chain = draws_per_chain;
  Rng rng(5);
  for (int c = 0; c < chains; ++c) {
    for (int k = 0; k < draws_per_chain; ++k) {
      d.draws.push_back(std::exp(0.1 * rng.standard_normal()));
      d.draws.push_back(rng.standard_normal());
    }
  }
  d.divergent.assign(static_cast<std::size_t>(chains) * draws_per_chain, 0);
  if (with_divergence) d.divergent[3] = 1;
  return d;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("interval plot draws one marker and two segments per parameter") {
  PlotSpec spec;
  spec.title = "difficulty";
  const auto svg = render_interval_plot(three_params(), spec);
  CHECK(xml_well_formed(svg));
  CHECK(count_occurrences(svg, "<circle class=\"median\"") == 3);
  CHECK(count_occurrences(svg, "class=\"ci50\"") == 3);
  CHECK(count_occurrences(svg, "class=\"ci90\"") == 3);
}

TEST_CASE("interval plot keeps the summary order top to bottom") {
  PlotSpec spec;
  const auto svg = render_interval_plot(three_params(), spec);
  const auto p1 = svg.find(">b[1]<");
  const auto p2 = svg.find(">b[2]<");
  const auto p3 = svg.find(">b[3]<");
  REQUIRE(p1 != std::string::npos);
  CHECK(p1 < p2);
  CHECK(p2 < p3);
}

TEST_CASE("interval plot accepts degenerate intervals") {
  std::vector<ParameterSummary> params = {{"c", 1.0, 1.0, 1.0, 1.0, 1.0, std::nullopt, std::nullopt}};
  const auto svg = render_interval_plot(params, PlotSpec{});
  CHECK(xml_well_formed(svg));
  CHECK(count_occurrences(svg, "<circle") == 1);
}

TEST_CASE("interval plot rejects an empty subset and tiny canvases") {
  CHECK_THROWS_AS(render_interval_plot({}, PlotSpec{}), std::invalid_argument);
  PlotSpec tiny;
  tiny.width = 50;
  CHECK_THROWS_AS(render_interval_plot(three_params(), tiny), irtbench::InputError);
}

TEST_CASE("test info plot draws one dashed line per ability") {
  std::vector<std::pair<std::string, double>> abilities;
  for (int k = 0; k < 13; ++k) abilities.emplace_back("alg" + std::to_string(k + 1), -3.0 + 0.5 * k);
  const auto svg = render_test_info(flat_curve(2.0), abilities, PlotSpec{});
  CHECK(xml_well_formed(svg));
  CHECK(count_occurrences(svg, "class=\"ability\"") == 13);
  CHECK(count_occurrences(svg, "stroke-dasharray") == 13);
}

TEST_CASE("test info plot without abilities shows only the curve") {
  const auto svg = render_test_info(flat_curve(1.0), {}, PlotSpec{});
  CHECK(xml_well_formed(svg));
  CHECK(count_occurrences(svg, "class=\"ability\"") == 0);
  CHECK(count_occurrences(svg, "<polyline") == 1);
}

TEST_CASE("flat zero information still renders a baseline polyline") {
  const auto svg = render_test_info(flat_curve(0.0), {}, PlotSpec{});
  CHECK(xml_well_formed(svg));
  CHECK(count_occurrences(svg, "<polyline") == 1);
}

TEST_CASE("abilities outside the grid are clipped with a warning") {
  const auto svg = render_test_info(flat_curve(1.0), {{"far", 9.5}}, PlotSpec{});
  CHECK(xml_well_formed(svg));
  CHECK(count_occurrences(svg, "class=\"ability\"") == 1);
  CHECK(count_occurrences(svg, "class=\"warning\"") == 1);
  CHECK(svg.find("clipped") != std::string::npos);
}

TEST_CASE("curve grid renders every labeled curve") {
  std::vector<std::pair<std::string, InformationCurve>> curves;
  for (int k = 0; k < 5; ++k) curves.emplace_back("i" + std::to_string(k + 1), flat_curve(k));
  const auto svg = render_curve_grid(curves, PlotSpec{});
  CHECK(xml_well_formed(svg));
  CHECK(count_occurrences(svg, "<polyline") == 5);
  CHECK_THROWS_AS(render_curve_grid({}, PlotSpec{}), std::invalid_argument);
}

TEST_CASE("rendering is deterministic") {
  const auto a = render_interval_plot(three_params(), PlotSpec{});
  const auto b = render_interval_plot(three_params(), PlotSpec{});
  CHECK(a == b);
}

TEST_CASE("convergence report passes a healthy run") {
  const auto draws = tiny_draws(2, 100, false);
  const auto report = convergence_report(summarize(draws), draws);
  CHECK(report.find("verdict: PASS") != std::string::npos);
  CHECK(report.find("<table>") != std::string::npos);
  CHECK(count_occurrences(report, "<polyline") == 2 * 2);  // 2 parameters x 2 chains
}

TEST_CASE("convergence report warns on divergences with the count") {
  const auto draws = tiny_draws(2, 100, true);
  const auto report = convergence_report(summarize(draws), draws);
  CHECK(report.find("verdict: WARN") != std::string::npos);
  CHECK(report.find("1 divergent draw") != std::string::npos);
}

TEST_CASE("convergence report lists degenerate parameters separately") {
  PosteriorDraws d;
  d.parameter_names = {"a[1]", "b[1]"};
  d.n_chains = 1;
  d.draws_per_chain = 120;
  Rng rng(9);
  for (int k = 0; k < 120; ++k) {
    d.draws.push_back(2.0);  // constant -> undefined rhat
    d.draws.push_back(rng.standard_normal());
  }
  d.divergent.assign(120, 0);
  const auto report = convergence_report(summarize(d), d);
  CHECK(report.find("Degenerate parameters") != std::string::npos);
  CHECK(report.find("a[1]") != std::string::npos);
}

TEST_CASE("convergence report flags high rhat") {
  PosteriorDraws d;
  d.parameter_names = {"x"};
  d.n_chains = 2;
  d.draws_per_chain = 100;
  Rng rng(10);
  for (int k = 0; k < 100; ++k) d.draws.push_back(rng.standard_normal());
  for (int k = 0; k < 100; ++k) d.draws.push_back(8.0 + rng.standard_normal());
  d.divergent.assign(200, 0);
  const auto report = convergence_report(summarize(d), d);
  CHECK(report.find("verdict: WARN") != std::string::npos);
  CHECK(report.find("rhat above") != std::string::npos);
}

}  // TEST_SUITE
