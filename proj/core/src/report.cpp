#include "irtbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "irtbench/error.hpp"

namespace irtbench {

namespace {

constexpr double kRhatFlag = 1.05;
constexpr double kEssFlag = 400.0;

const char* kChainPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Maps data coordinates onto pixel coordinates of a plot area.
struct Axis {
  double lo = 0.0, hi = 1.0;
  double px_lo = 0.0, px_hi = 1.0;

  double to_px(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

// Round tick step to a 1/2/5 decade multiple.
std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  double step = std::pow(10.0, std::floor(std::log10(span / target)));
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (span / (step * mult) <= target) {
      step *= mult;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * span; t += step) ticks.push_back(t == 0.0 ? 0.0 : t);
  return ticks;
}

void pad_range(double& lo, double& hi) {
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
}

std::string svg_open(int width, int height, const std::string& title) {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
    << "\" fill=\"white\"/>\n"
    << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  return s.str();
}

void x_axis(std::ostringstream& s, const Axis& x, double y_px) {
  s << "<line x1=\"" << fmt(x.px_lo) << "\" y1=\"" << fmt(y_px) << "\" x2=\"" << fmt(x.px_hi)
    << "\" y2=\"" << fmt(y_px) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (double t : nice_ticks(x.lo, x.hi)) {
    const double px = x.to_px(t);
    s << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y_px) << "\" x2=\"" << fmt(px) << "\" y2=\""
      << fmt(y_px + 5) << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(y_px + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t, "%g")
      << "</text>\n";
  }
}

void y_axis(std::ostringstream& s, const Axis& y, double x_px) {
  s << "<line x1=\"" << fmt(x_px) << "\" y1=\"" << fmt(y.to_px(y.lo)) << "\" x2=\"" << fmt(x_px)
    << "\" y2=\"" << fmt(y.to_px(y.hi)) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (double t : nice_ticks(y.lo, y.hi)) {
    const double py = y.to_px(t);
    s << "<line x1=\"" << fmt(x_px - 5) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(x_px)
      << "\" y2=\"" << fmt(py) << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << fmt(x_px - 8) << "\" y=\"" << fmt(py + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t, "%g")
      << "</text>\n";
  }
}

std::string polyline(const std::vector<double>& grid, const std::vector<double>& values,
                     const Axis& x, const Axis& y, const char* stroke, const char* extra = "") {
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"" << extra
    << " points=\"";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k) s << ' ';
    const double v = std::isfinite(values[k]) ? values[k] : y.hi;
    s << fmt(x.to_px(grid[k])) << ',' << fmt(y.to_px(std::min(v, y.hi)));
  }
  s << "\"/>\n";
  return s.str();
}

}  // namespace

void PlotSpec::validate() const {
  if (width < 100 || height < 100) throw InputError("plot: width and height must be >= 100");
}

std::string render_interval_plot(const std::vector<ParameterSummary>& parameters,
                                 const PlotSpec& spec) {
  spec.validate();
  if (parameters.empty()) throw std::invalid_argument("interval plot: no parameters");

  double lo = parameters.front().ci90_lo, hi = parameters.front().ci90_hi;
  for (const auto& p : parameters) {
    lo = std::min(lo, p.ci90_lo);
    hi = std::max(hi, p.ci90_hi);
  }
  pad_range(lo, hi);

  const double left = 130.0, right = 25.0, top = 40.0, bottom = 45.0;
  Axis x{lo, hi, left, spec.width - right};
  const double row_h = (spec.height - top - bottom) / static_cast<double>(parameters.size());

  std::ostringstream s;
  s << svg_open(spec.width, spec.height, spec.title);
  x_axis(s, x, spec.height - bottom);
  for (std::size_t r = 0; r < parameters.size(); ++r) {
    const auto& p = parameters[r];
    const double y = top + (static_cast<double>(r) + 0.5) * row_h;
    s << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << xml_escape(p.name) << "</text>\n";
    s << "<line class=\"ci90\" x1=\"" << fmt(x.to_px(p.ci90_lo)) << "\" y1=\"" << fmt(y)
      << "\" x2=\"" << fmt(x.to_px(p.ci90_hi)) << "\" y2=\"" << fmt(y)
      << "\" stroke=\"#4477cc\" stroke-width=\"1.5\"/>\n";
    s << "<line class=\"ci50\" x1=\"" << fmt(x.to_px(p.ci50_lo)) << "\" y1=\"" << fmt(y)
      << "\" x2=\"" << fmt(x.to_px(p.ci50_hi)) << "\" y2=\"" << fmt(y)
      << "\" stroke=\"#4477cc\" stroke-width=\"5\"/>\n";
    s << "<circle class=\"median\" cx=\"" << fmt(x.to_px(p.median)) << "\" cy=\"" << fmt(y)
      << "\" r=\"3.5\" fill=\"#222222\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_test_info(const InformationCurve& test_info,
                             const std::vector<std::pair<std::string, double>>& abilities,
                             const PlotSpec& spec) {
  spec.validate();
  if (test_info.grid.empty()) throw std::invalid_argument("test info plot: empty curve");

  const double left = 60.0, right = 25.0, top = 40.0, bottom = 45.0;
  double vmax = 0.0;
  for (double v : test_info.values) {
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  }
  if (vmax <= 0.0) vmax = 1.0;
  Axis x{test_info.grid.front(), test_info.grid.back(), left, spec.width - right};
  Axis y{0.0, vmax * 1.05, spec.height - bottom, top};

  std::ostringstream s;
  s << svg_open(spec.width, spec.height, spec.title);
  x_axis(s, x, spec.height - bottom);
  y_axis(s, y, left);
  s << polyline(test_info.grid, test_info.values, x, y, "#4477cc");

  int clipped = 0;
  for (const auto& [label, theta] : abilities) {
    double t = theta;
    if (t < x.lo || t > x.hi) {
      ++clipped;
      t = std::clamp(t, x.lo, x.hi);
    }
    const double px = x.to_px(t);
    s << "<line class=\"ability\" x1=\"" << fmt(px) << "\" y1=\"" << fmt(y.to_px(y.hi))
      << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(y.to_px(0.0))
      << "\" stroke=\"#777777\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";
    s << "<text x=\"" << fmt(px + 3) << "\" y=\"" << fmt(top + 12)
      << "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#555555\" "
         "transform=\"rotate(90 "
      << fmt(px + 3) << ' ' << fmt(top + 12) << ")\">" << xml_escape(label) << "</text>\n";
  }
  if (clipped > 0) {
    s << "<text class=\"warning\" x=\"" << fmt(left) << "\" y=\"" << fmt(top - 6)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#aa3333\">warning: " << clipped
      << " abilities outside the curve grid were clipped</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_curve_grid(const std::vector<std::pair<std::string, InformationCurve>>& curves,
                              const PlotSpec& spec) {
  spec.validate();
  if (curves.empty()) throw std::invalid_argument("curve grid: no curves");

  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(curves.size()))));
  const int rows = static_cast<int>(std::ceil(static_cast<double>(curves.size()) / cols));
  const double top = 34.0;
  const double cell_w = static_cast<double>(spec.width) / cols;
  const double cell_h = (static_cast<double>(spec.height) - top) / rows;

  double vmax = 0.0;
  for (const auto& [label, c] : curves) {
    for (double v : c.values) {
      if (std::isfinite(v)) vmax = std::max(vmax, v);
    }
  }
  if (vmax <= 0.0) vmax = 1.0;

  std::ostringstream s;
  s << svg_open(spec.width, spec.height, spec.title);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& [label, curve] = curves[k];
    const int r = static_cast<int>(k) / cols, c = static_cast<int>(k) % cols;
    const double x0 = c * cell_w + 8, x1 = (c + 1) * cell_w - 8;
    const double y0 = top + r * cell_h + 16, y1 = top + (r + 1) * cell_h - 8;
    Axis x{curve.grid.front(), curve.grid.back(), x0, x1};
    Axis y{0.0, vmax * 1.05, y1, y0};
    s << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0)
      << "\" height=\"" << fmt(y1 - y0) << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    s << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(y0 - 4)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
      << xml_escape(label) << "</text>\n";
    s << polyline(curve.grid, curve.values, x, y, "#4477cc");
  }
  s << "</svg>\n";
  return s.str();
}

std::string convergence_report(const PosteriorSummary& summary, const PosteriorDraws& draws) {
  if (summary.parameters.size() != static_cast<std::size_t>(draws.dim())) {
    throw std::invalid_argument("convergence report: summary and draws disagree on parameters");
  }

  bool rhat_ok = true;
  std::vector<const ParameterSummary*> degenerate;
  for (const auto& p : summary.parameters) {
    if (!p.rhat) degenerate.push_back(&p);
    else if (*p.rhat > kRhatFlag) rhat_ok = false;
  }
  const bool pass = rhat_ok && summary.divergence_count == 0;

  std::ostringstream s;
  s << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\"/>\n<title>convergence report"
       "</title>\n<style>\nbody { font-family: sans-serif; margin: 24px; }\n"
       "table { border-collapse: collapse; }\ntd, th { border: 1px solid #999; padding: 3px 8px; "
       "font-size: 13px; }\n.flag { background: #ffdddd; }\n</style>\n</head>\n<body>\n";
  s << "<h1>Convergence report</h1>\n";
  if (pass) {
    s << "<p class=\"verdict\">verdict: PASS</p>\n";
  } else {
    s << "<p class=\"verdict\">verdict: WARN (";
    if (!rhat_ok) s << "rhat above " << fmt(kRhatFlag, "%g");
    if (!rhat_ok && summary.divergence_count > 0) s << ", ";
    if (summary.divergence_count > 0) s << summary.divergence_count << " divergent draws";
    s << ")</p>\n";
  }
  s << "<p>chains: " << draws.n_chains << ", draws per chain: " << draws.draws_per_chain
    << ", divergent draws: " << summary.divergence_count << "</p>\n";

  s << "<table>\n<tr><th>parameter</th><th>median</th><th>rhat</th><th>ess_bulk</th>"
       "<th>flags</th></tr>\n";
  for (const auto& p : summary.parameters) {
    if (!p.rhat) continue;
    std::string flags;
    if (*p.rhat > kRhatFlag) flags += "rhat ";
    if (p.ess_bulk && *p.ess_bulk < kEssFlag) flags += "low-ess ";
    s << "<tr" << (flags.empty() ? "" : " class=\"flag\"") << "><td>" << xml_escape(p.name)
      << "</td><td>" << fmt(p.median, "%.4g") << "</td><td>" << fmt(*p.rhat, "%.4f") << "</td><td>"
      << (p.ess_bulk ? fmt(*p.ess_bulk, "%.1f") : std::string("undefined")) << "</td><td>" << flags
      << "</td></tr>\n";
  }
  s << "</table>\n";

  if (!degenerate.empty()) {
    s << "<h2>Degenerate parameters (zero variance, rhat undefined)</h2>\n<ul>\n";
    for (const auto* p : degenerate) {
      s << "<li>" << xml_escape(p->name) << " = " << fmt(p->median, "%.6g") << "</li>\n";
    }
    s << "</ul>\n";
  }

  // Traceplot thumbnails, chains color-coded, downsampled to at most 256
  // points per chain.
  s << "<h2>Traceplots</h2>\n";
  const int tw = 360, th = 90;
  for (int k = 0; k < draws.dim(); ++k) {
    double lo = draws.value(0, 0, k), hi = lo;
    for (int c = 0; c < draws.n_chains; ++c) {
      for (int d = 0; d < draws.draws_per_chain; ++d) {
        lo = std::min(lo, draws.value(c, d, k));
        hi = std::max(hi, draws.value(c, d, k));
      }
    }
    pad_range(lo, hi);
    Axis x{0.0, static_cast<double>(draws.draws_per_chain - 1), 4.0, tw - 4.0};
    Axis y{lo, hi, th - 4.0, 16.0};
    s << "<div><svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << tw << "\" height=\"" << th
      << "\" viewBox=\"0 0 " << tw << " " << th << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << tw << "\" height=\"" << th
      << "\" fill=\"#fafafa\" stroke=\"#cccccc\"/>\n"
      << "<text x=\"4\" y=\"12\" font-family=\"sans-serif\" font-size=\"10\">"
      << xml_escape(draws.parameter_names[k]) << "</text>\n";
    const int stride = std::max(1, draws.draws_per_chain / 256);
    for (int c = 0; c < draws.n_chains; ++c) {
      const char* color = kChainPalette[c % (sizeof(kChainPalette) / sizeof(*kChainPalette))];
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"0.8\" points=\"";
      bool first = true;
      for (int d = 0; d < draws.draws_per_chain; d += stride) {
        if (!first) s << ' ';
        first = false;
        s << fmt(x.to_px(d)) << ',' << fmt(y.to_px(draws.value(c, d, k)));
      }
      s << "\"/>\n";
    }
    s << "</svg></div>\n";
  }
  s << "</body>\n</html>\n";
  return s.str();
}

}  // namespace irtbench
