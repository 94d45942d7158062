#include "mct/exp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mct/text.hpp"

namespace mct::exp {
namespace {

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 80, kRight = 180, kTop = 50, kBottom = 70;

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!std::isfinite(lo)) lo = 0, hi = 1;
        if (hi - lo < 1e-12) {
            const double pad = std::max(std::abs(lo) * 0.05, 1e-3);
            lo -= pad;
            hi += pad;
        }
    }
};

}  // namespace

std::string render_svg(const LineChart& chart) {
    Range xr, yr;
    for (const auto& s : chart.series) {
        for (const double x : s.xs) xr.add(x);
        for (const double y : s.ys) yr.add(y);
    }
    xr.settle();
    yr.settle();
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto py = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
      << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" << escape(chart.title) << "</text>\n";

    // axes
    o << "<g stroke=\"black\" fill=\"none\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
      << "\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph << "\"/>\n"
      << "</g>\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / kTicks;
        const double yv = yr.lo + (yr.hi - yr.lo) * i / kTicks;
        o << "<line x1=\"" << format_fixed(px(xv), 2) << "\" y1=\"" << kTop + ph << "\" x2=\""
          << format_fixed(px(xv), 2) << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << format_fixed(px(xv), 2) << "\" y=\"" << kTop + ph + 20
          << "\" text-anchor=\"middle\">" << format_fixed(xv, 4) << "</text>\n"
          << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << format_fixed(py(yv), 2) << "\" x2=\"" << kLeft
          << "\" y2=\"" << format_fixed(py(yv), 2) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << kLeft - 8 << "\" y=\"" << format_fixed(py(yv) + 4, 2)
          << "\" text-anchor=\"end\">" << format_fixed(yv, 4) << "</text>\n";
    }
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">"
      << escape(chart.x_label) << "</text>\n"
      << "<text x=\"20\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << kTop + ph / 2 << ")\">" << escape(chart.y_label) << "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        o << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\" points=\"";
        const std::size_t n = std::min(s.xs.size(), s.ys.size());
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
            o << (first ? "" : " ") << format_fixed(px(s.xs[i]), 2) << ',' << format_fixed(py(s.ys[i]), 2);
            first = false;
        }
        o << "\"/>\n";
        const double ly = kTop + 20 + 22.0 * static_cast<double>(k);
        const double lx = kWidth - kRight + 20;
        o << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly
          << "\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace mct::exp
