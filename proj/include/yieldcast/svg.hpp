#pragma once

#include <string>
#include <vector>

namespace yieldcast {

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;  // draw point markers in addition to the polyline
};

struct SvgChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 760;
    int height = 420;
};

/// Minimal line chart: axes, tick labels, legend, one polyline per series.
/// Structural enough to test (series count == polyline count).
std::string render_line_chart(const SvgChartSpec& spec,
                              const std::vector<SvgSeries>& series);

}  // namespace yieldcast
