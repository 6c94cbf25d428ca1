#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace spiked {

enum class SeriesStyle { line, scatter };

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  SeriesStyle style = SeriesStyle::line;
  /// Optional symmetric y error bars, one per point (scatter only).
  std::vector<double> y_errors;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::string output_path;

  /// Throws std::invalid_argument without series or with non-finite points.
  void validate() const;
};

/// Self-contained 800x600 SVG: linear axes with 5 ticks each, one <path>
/// per line series and one <g> of circles per scatter series.
std::string render_svg(const PlotSpec& spec);

void write_svg(std::ostream& out, const PlotSpec& spec);

/// Renders to spec.output_path. Throws std::runtime_error if it cannot be written.
void save_svg(const PlotSpec& spec);

}  // namespace spiked
