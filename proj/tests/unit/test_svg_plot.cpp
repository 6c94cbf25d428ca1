#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "spiked/svg_plot.hpp"

using namespace spiked;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

PlotSpec sample_spec() {
  PlotSpec spec;
  spec.title = "Overlap <v, v_hat> & theory";
  spec.x_label = "lambda";
  spec.y_label = "overlap";
  spec.series.push_back({"theory", {{0, 0}, {1, 0}, {2, 0.9}}, SeriesStyle::line, {}});
  spec.series.push_back({"empirical", {{0, 0.1}, {1, 0.3}, {2, 0.88}}, SeriesStyle::scatter, {0.01, 0.02, 0.0}});
  return spec;
}

}  // namespace

TEST_CASE("rendered SVG structure") {
  const std::string svg = render_svg(sample_spec());
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("viewBox=\"0 0 800 600\"") != std::string::npos);
  CHECK(svg.ends_with("</svg>\n"));
  CHECK(count(svg, "<path class=\"series\"") == 1);
  CHECK(count(svg, "<g class=\"series\"") == 1);
  CHECK(count(svg, "<circle") == 3);
  CHECK(count(svg, "<line") == 10 + 2);  // ticks plus two nonzero error bars
  CHECK(svg.find("&lt;v, v_hat&gt; &amp; theory") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(count(svg, "<g") == count(svg, "</g>"));
  CHECK(count(svg, "<text") == count(svg, "</text>"));
}

TEST_CASE("validation") {
  PlotSpec empty;
  CHECK_THROWS_AS(render_svg(empty), std::invalid_argument);
  PlotSpec bad = sample_spec();
  bad.series[0].points[1].second = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(render_svg(bad), std::invalid_argument);
  bad = sample_spec();
  bad.series[1].y_errors.pop_back();
  CHECK_THROWS_AS(render_svg(bad), std::invalid_argument);
  bad = sample_spec();
  bad.series[0].points.clear();
  CHECK_THROWS_AS(render_svg(bad), std::invalid_argument);
}

TEST_CASE("degenerate ranges still render") {
  PlotSpec spec;
  spec.series.push_back({"flat", {{1, 1}}, SeriesStyle::scatter, {}});
  const std::string svg = render_svg(spec);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
}

TEST_CASE("saving") {
  PlotSpec spec = sample_spec();
  spec.output_path = (std::filesystem::temp_directory_path() / "spiked_svg_test.svg").string();
  save_svg(spec);
  std::ifstream in(spec.output_path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == render_svg(spec));
  std::filesystem::remove(spec.output_path);
  spec.output_path = "/nonexistent-dir/plot.svg";
  CHECK_THROWS_AS(save_svg(spec), std::runtime_error);
}
