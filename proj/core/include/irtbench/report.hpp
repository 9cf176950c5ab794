#pragma once

#include <string>
#include <utility>
#include <vector>

#include "irtbench/cat.hpp"
#include "irtbench/information.hpp"
#include "irtbench/sampler.hpp"

namespace irtbench {

enum class PlotKind { interval_plot, curve_grid, test_info_with_abilities };

struct PlotSpec {
  std::string title;
  PlotKind kind = PlotKind::interval_plot;
  int width = 900;
  int height = 600;

  void validate() const;
};

// One row per parameter: median marker, thick 50% interval, thin 90%
// interval. Returns a standalone SVG document.
std::string render_interval_plot(const std::vector<ParameterSummary>& parameters,
                                 const PlotSpec& spec);

// Test information polyline with one dashed, labeled vertical line per
// ability. Abilities outside the curve's grid are clamped to the edge and a
// warning annotation is added.
std::string render_test_info(const InformationCurve& test_info,
                             const std::vector<std::pair<std::string, double>>& abilities,
                             const PlotSpec& spec);

// Small-multiples grid of labeled curves on a shared scale.
std::string render_curve_grid(const std::vector<std::pair<std::string, InformationCurve>>& curves,
                              const PlotSpec& spec);

// HTML convergence report: per-parameter Rhat / ESS table with flags, a
// PASS/WARN verdict, a section for degenerate (zero-variance) parameters,
// and per-parameter traceplot thumbnails with chains color-coded.
std::string convergence_report(const PosteriorSummary& summary, const PosteriorDraws& draws);

}  // namespace irtbench
