#include "yieldcast/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace yieldcast {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_line_chart(const SvgChartSpec& spec,
                              const std::vector<SvgSeries>& series) {
    constexpr double ml = 64, mr = 16, mt = 36, mb = 48;  // margins
    const double pw = spec.width - ml - mr;
    const double ph = spec.height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    if (!(xmin < xmax)) { xmin -= 1.0; xmax += 1.0; }
    if (!(ymin < ymax)) { ymin -= 1.0; ymax += 1.0; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << ' '
        << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << escape(spec.title)
        << "</text>\n";

    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << mt + ph << "\" stroke=\"black\"/>\n";

    constexpr int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / n_ticks;
        const double fy = ymin + (ymax - ymin) * i / n_ticks;
        out << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << mt + ph << "\" x2=\""
            << fmt(px(fx)) << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << fmt(fx) << "</text>\n";
        out << "<line x1=\"" << ml - 4 << "\" y1=\"" << fmt(py(fy)) << "\" x2=\"" << ml
            << "\" y2=\"" << fmt(py(fy)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(py(fy) + 3)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(spec.x_label) << "</text>\n";
    out << "<text x=\"14\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
        << "transform=\"rotate(-90 14 " << mt + ph / 2 << ")\">" << escape(spec.y_label)
        << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        out << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
            if (i > 0) out << ' ';
            out << fmt(px(ser.x[i])) << ',' << fmt(py(ser.y[i]));
        }
        out << "\"/>\n";
        if (ser.markers) {
            for (size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i)
                out << "<circle cx=\"" << fmt(px(ser.x[i])) << "\" cy=\""
                    << fmt(py(ser.y[i])) << "\" r=\"2.5\" fill=\"" << ser.color
                    << "\"/>\n";
        }
        // legend entry
        const double ly = mt + 14 + 16 * static_cast<double>(s);
        out << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << ml + pw - 100 << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << ser.color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw - 94 << "\" y=\"" << fmt(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(ser.label)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace yieldcast
