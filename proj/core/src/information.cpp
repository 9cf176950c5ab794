#include "irtbench/information.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "irtbench/csv.hpp"
#include "irtbench/diagnostics.hpp"
#include "irtbench/error.hpp"
#include "irtbench/model.hpp"

namespace irtbench {

namespace {

constexpr double kInfoFloor = 1e-12;

double item_info_at(double a, double b, double theta) {
  const double p = success_probability(a, b, theta);
  return a * a * p * (1.0 - p);
}

}  // namespace

void AbilityGrid::validate() const {
  if (!(lo < hi)) throw InputError("ability grid: lo must be < hi");
  if (!(step > 0.0)) throw InputError("ability grid: step must be positive");
  if ((hi - lo) / step > 1e6) throw InputError("ability grid: more than 10^6 points");
}

std::vector<double> AbilityGrid::points() const {
  validate();
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> pts(n);
  for (int k = 0; k < n; ++k) pts[k] = lo + k * step;
  return pts;
}

InformationCurve icc(double a, double b, const AbilityGrid& grid) {
  if (!(a > 0.0)) throw std::domain_error("icc: discrimination must be positive");
  InformationCurve c;
  c.kind = CurveKind::icc;
  c.grid = grid.points();
  c.values.reserve(c.grid.size());
  for (double theta : c.grid) c.values.push_back(success_probability(a, b, theta));
  return c;
}

InformationCurve item_information(double a, double b, const AbilityGrid& grid) {
  if (!(a > 0.0)) throw std::domain_error("item_information: discrimination must be positive");
  InformationCurve c;
  c.kind = CurveKind::item_info;
  c.grid = grid.points();
  c.values.reserve(c.grid.size());
  for (double theta : c.grid) c.values.push_back(item_info_at(a, b, theta));
  return c;
}

InformationCurve test_information(const std::vector<std::pair<double, double>>& items,
                                  const AbilityGrid& grid) {
  if (items.empty()) throw std::invalid_argument("test_information: empty item list");
  for (const auto& [a, b] : items) {
    if (!(a > 0.0)) throw std::domain_error("test_information: discrimination must be positive");
  }
  InformationCurve c;
  c.kind = CurveKind::test_info;
  c.grid = grid.points();
  c.values.assign(c.grid.size(), 0.0);
  for (const auto& [a, b] : items) {
    for (std::size_t k = 0; k < c.grid.size(); ++k) c.values[k] += item_info_at(a, b, c.grid[k]);
  }
  return c;
}

InformationCurve sem(const InformationCurve& test_info) {
  if (test_info.kind != CurveKind::test_info) {
    throw std::invalid_argument("sem: input curve must be test information");
  }
  InformationCurve c;
  c.kind = CurveKind::sem;
  c.grid = test_info.grid;
  c.values.reserve(c.grid.size());
  for (double v : test_info.values) {
    c.values.push_back(v > kInfoFloor ? 1.0 / std::sqrt(v)
                                      : std::numeric_limits<double>::infinity());
  }
  return c;
}

MedianCurveSet median_curves(const PosteriorDraws& draws, const AbilityGrid& grid,
                             bool with_envelope) {
  MedianCurveSet set;
  int n_items = 0, n_persons = 0;
  for (const auto& name : draws.parameter_names) {
    if (name.rfind("a[", 0) == 0) ++n_items;
    if (name.rfind("theta[", 0) == 0) ++n_persons;
  }
  if (n_items == 0) throw std::invalid_argument("median_curves: draws carry no item parameters");

  for (int i = 0; i < n_items; ++i) {
    const double a_med = quantile(draws.pooled(i), 0.5);
    const double b_med = quantile(draws.pooled(n_items + i), 0.5);
    set.item_params.emplace_back(a_med, b_med);
    set.item_info.push_back(item_information(a_med, b_med, grid));
  }
  for (int p = 0; p < n_persons; ++p) {
    set.theta_medians.push_back(quantile(draws.pooled(2 * n_items + p), 0.5));
  }
  set.test_info = test_information(set.item_params, grid);
  set.sem_curve = sem(set.test_info);

  if (with_envelope) {
    const auto pts = grid.points();
    InformationCurve lo, hi;
    lo.kind = hi.kind = CurveKind::test_info;
    lo.grid = hi.grid = pts;
    const long total = static_cast<long>(draws.n_chains) * draws.draws_per_chain;
    std::vector<double> at_point(total);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      long idx = 0;
      for (int c = 0; c < draws.n_chains; ++c) {
        for (int d = 0; d < draws.draws_per_chain; ++d, ++idx) {
          double info = 0.0;
          for (int i = 0; i < n_items; ++i) {
            const double a = draws.value(c, d, i);
            const double b = draws.value(c, d, n_items + i);
            info += item_info_at(a, b, pts[k]);
          }
          at_point[idx] = info;
        }
      }
      std::sort(at_point.begin(), at_point.end());
      lo.values.push_back(quantile_sorted(at_point, 0.05));
      hi.values.push_back(quantile_sorted(at_point, 0.95));
    }
    set.test_info_envelope = std::make_pair(std::move(lo), std::move(hi));
  }
  return set;
}

void write_curve_csv(std::ostream& out, const InformationCurve& curve) {
  write_csv_row(out, {"theta", "value"});
  char buf[40];
  for (std::size_t k = 0; k < curve.grid.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", curve.grid[k]);
    std::string theta = buf;
    std::string value;
    if (std::isinf(curve.values[k])) {
      value = "inf";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", curve.values[k]);
      value = buf;
    }
    write_csv_row(out, {theta, value});
  }
}

}  // namespace irtbench
