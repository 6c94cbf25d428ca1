#include "spiked/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace spiked {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;  // legend column
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;
constexpr int kTicks = 5;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      const double d = std::max(std::abs(lo) * 0.05, 0.5);
      lo -= d;
      hi += d;
    } else {
      const double d = 0.04 * (hi - lo);
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

void PlotSpec::validate() const {
  if (series.empty()) throw std::invalid_argument("plot: needs at least one series");
  for (const PlotSeries& s : series) {
    if (s.points.empty()) throw std::invalid_argument("plot: series '" + s.name + "' has no points");
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw std::invalid_argument("plot: series '" + s.name + "' has a non-finite point");
      }
    }
    if (!s.y_errors.empty()) {
      if (s.y_errors.size() != s.points.size()) {
        throw std::invalid_argument("plot: series '" + s.name + "' error bars do not match its points");
      }
      for (double e : s.y_errors) {
        if (!std::isfinite(e) || e < 0.0) throw std::invalid_argument("plot: error bars must be finite and >= 0");
      }
    }
  }
}

std::string render_svg(const PlotSpec& spec) {
  spec.validate();
  Range xr, yr;
  for (const PlotSeries& s : spec.series) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      xr.add(s.points[i].first);
      const double e = s.y_errors.empty() ? 0.0 : s.y_errors[i];
      yr.add(s.points[i].second - e);
      yr.add(s.points[i].second + e);
    }
  }
  xr.pad();
  yr.pad();

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n"
    << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
    << escape(spec.title) << "</text>\n";

  o << "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n"
    << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\"/>\n";
  for (int t = 0; t < kTicks; ++t) {
    const double f = static_cast<double>(t) / (kTicks - 1);
    const double x = kLeft + f * pw;
    const double y = kTop + ph - f * ph;
    o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(x) << "\" y2=\""
      << num(kTop + ph + 6) << "\"/>\n";
    o << "<line x1=\"" << num(kLeft - 6) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(y)
      << "\"/>\n";
  }
  o << "</g>\n<g id=\"tick-labels\" fill=\"black\">\n";
  for (int t = 0; t < kTicks; ++t) {
    const double f = static_cast<double>(t) / (kTicks - 1);
    o << "<text x=\"" << num(kLeft + f * pw) << "\" y=\"" << num(kTop + ph + 22) << "\" text-anchor=\"middle\">"
      << tick_label(xr.lo + f * (xr.hi - xr.lo)) << "</text>\n";
    o << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(kTop + ph - f * ph + 4) << "\" text-anchor=\"end\">"
      << tick_label(yr.lo + f * (yr.hi - yr.lo)) << "</text>\n";
  }
  o << "</g>\n";
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 20) << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text x=\"20\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << num(kTop + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    if (s.style == SeriesStyle::line) {
      o << "<path class=\"series\" data-name=\"" << escape(s.name) << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" d=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        o << (i == 0 ? "M" : " L") << num(px(s.points[i].first)) << ' ' << num(py(s.points[i].second));
      }
      o << "\"/>\n";
    } else {
      o << "<g class=\"series\" data-name=\"" << escape(s.name) << "\" fill=\"" << color << "\" stroke=\"" << color
        << "\">\n";
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        const double cx = px(s.points[i].first);
        const double cy = py(s.points[i].second);
        if (!s.y_errors.empty() && s.y_errors[i] > 0.0) {
          const double e = s.y_errors[i];
          o << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(s.points[i].second - e)) << "\" x2=\"" << num(cx)
            << "\" y2=\"" << num(py(s.points[i].second + e)) << "\"/>\n";
        }
        o << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"3.5\"/>\n";
      }
      o << "</g>\n";
    }
  }

  o << "<g id=\"legend\">\n";
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const double y = kTop + 14 + 20.0 * static_cast<double>(si);
    const double x = kWidth - kRight + 15;
    const char* color = kPalette[si % std::size(kPalette)];
    o << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 9) << "\" width=\"12\" height=\"12\" fill=\"" << color
      << "\"/>\n<text x=\"" << num(x + 18) << "\" y=\"" << num(y + 1) << "\">" << escape(spec.series[si].name)
      << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void write_svg(std::ostream& out, const PlotSpec& spec) { out << render_svg(spec); }

void save_svg(const PlotSpec& spec) {
  const std::string text = render_svg(spec);
  std::ofstream out(spec.output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + spec.output_path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + spec.output_path);
}

}  // namespace spiked
