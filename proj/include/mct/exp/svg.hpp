#pragma once

#include <string>
#include <vector>

namespace mct::exp {

struct Series {
    std::string name;
    std::string color;
    std::vector<double> xs;
    std::vector<double> ys;
};

// Standalone SVG 1.1 line chart on a fixed 800x600 canvas: axes with ticks,
// one <polyline> per series and a legend.
struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

std::string render_svg(const LineChart& chart);

}  // namespace mct::exp
