#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "irtbench/sampler.hpp"

namespace irtbench {

// Evaluation grid over ability. Points are lo, lo+step, ... up to hi
// (inclusive when (hi-lo)/step is integral).
struct AbilityGrid {
  double lo = -6.0;
  double hi = 6.0;
  double step = 0.05;

  void validate() const;
  std::vector<double> points() const;
};

enum class CurveKind { icc, item_info, test_info, sem };

struct InformationCurve {
  std::vector<double> grid;
  std::vector<double> values;
  CurveKind kind = CurveKind::icc;
};

// Item characteristic curve: success probability over the ability grid.
InformationCurve icc(double a, double b, const AbilityGrid& grid);

// Item information a^2 * P * (1-P); peaks at theta = b with value a^2/4.
InformationCurve item_information(double a, double b, const AbilityGrid& grid);

// Test information: pointwise sum of the item information curves.
InformationCurve test_information(const std::vector<std::pair<double, double>>& items,
                                  const AbilityGrid& grid);

// Standard error of measurement 1/sqrt(I). Where I <= 1e-12 the SEM is
// unbounded; those points carry +infinity.
InformationCurve sem(const InformationCurve& test_info);

struct MedianCurveSet {
  std::vector<std::pair<double, double>> item_params;  // posterior-median (a, b) per item
  std::vector<double> theta_medians;                   // posterior-median ability per person
  std::vector<InformationCurve> item_info;
  InformationCurve test_info;
  InformationCurve sem_curve;
  // Pointwise 90% envelope of the test information across pooled draws.
  std::optional<std::pair<InformationCurve, InformationCurve>> test_info_envelope;
};

// Curves built from per-parameter posterior medians, optionally with a
// per-grid-point envelope taken over every pooled draw.
MedianCurveSet median_curves(const PosteriorDraws& draws, const AbilityGrid& grid,
                             bool with_envelope = false);

// Two-column (theta, value) CSV; +infinity serializes as "inf".
void write_curve_csv(std::ostream& out, const InformationCurve& curve);

}  // namespace irtbench
