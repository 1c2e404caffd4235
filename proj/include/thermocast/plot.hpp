#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "thermocast/common.hpp"
#include "thermocast/forecast.hpp"

namespace thermocast {

namespace detail {

// Smallest of {1, 2, 5} * 10^k that is >= raw.
inline double nice_step(double raw) {
    if (!(raw > 0.0)) return 1.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double nice = frac <= 1.0 ? 1.0 : frac <= 2.0 ? 2.0 : frac <= 5.0 ? 5.0 : 10.0;
    return nice * mag;
}

inline std::string svg_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

// 800x400 SVG line chart of a forecast report: predicted in red, actual (when
// present) in blue, hour index on x, °C on y. Identical report, identical
// bytes.
inline std::string render_line_chart(const ForecastReport& report) {
    if (report.predicted.empty()) detail::fail("plot: report has no predictions");
    if (report.has_actual() && report.actual.size() != report.predicted.size())
        detail::fail("plot: predicted and actual lengths differ");

    const double kWidth = 800.0, kHeight = 400.0;
    const double kLeft = 60.0, kRight = 786.0, kTop = 16.0, kBottom = 352.0;

    double lo = report.predicted.front(), hi = lo;
    const auto widen = [&](const std::vector<double>& values) {
        for (const double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    };
    widen(report.predicted);
    widen(report.actual);
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    const double y_step = detail::nice_step((hi - lo + 2.0 * pad) / 6.0);
    const double y_min = std::floor((lo - pad) / y_step) * y_step;
    const double y_max = std::ceil((hi + pad) / y_step) * y_step;

    const std::size_t n = report.predicted.size();
    const double x_max = static_cast<double>(n > 1 ? n - 1 : 1);
    const int x_step = std::max(1, static_cast<int>(detail::nice_step(x_max / 8.0)));

    const auto px = [&](double hour) { return kLeft + hour / x_max * (kRight - kLeft); };
    const auto py = [&](double v) { return kBottom - (v - y_min) / (y_max - y_min) * (kBottom - kTop); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 800 400\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"400\" fill=\"white\"/>\n";

    // gridlines and y tick labels
    for (double tick = y_min; tick <= y_max + 1e-9 * y_step; tick += y_step) {
        const double y = py(tick);
        os << "<line x1=\"" << detail::svg_coord(kLeft) << "\" y1=\"" << detail::svg_coord(y) << "\" x2=\""
           << detail::svg_coord(kRight) << "\" y2=\"" << detail::svg_coord(y)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "<text x=\"" << detail::svg_coord(kLeft - 8.0) << "\" y=\"" << detail::svg_coord(y + 4.0)
           << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << fmt_double(tick)
           << "</text>\n";
    }
    // x tick labels
    for (std::size_t hour = 0; hour < n; hour += static_cast<std::size_t>(x_step)) {
        const double x = px(static_cast<double>(hour));
        os << "<line x1=\"" << detail::svg_coord(x) << "\" y1=\"" << detail::svg_coord(kBottom) << "\" x2=\""
           << detail::svg_coord(x) << "\" y2=\"" << detail::svg_coord(kBottom + 5.0)
           << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        os << "<text x=\"" << detail::svg_coord(x) << "\" y=\"" << detail::svg_coord(kBottom + 20.0)
           << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << hour << "</text>\n";
    }

    // axes
    os << "<line x1=\"" << detail::svg_coord(kLeft) << "\" y1=\"" << detail::svg_coord(kTop) << "\" x2=\""
       << detail::svg_coord(kLeft) << "\" y2=\"" << detail::svg_coord(kBottom)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<line x1=\"" << detail::svg_coord(kLeft) << "\" y1=\"" << detail::svg_coord(kBottom) << "\" x2=\""
       << detail::svg_coord(kRight) << "\" y2=\"" << detail::svg_coord(kBottom)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << detail::svg_coord((kLeft + kRight) / 2.0) << "\" y=\"" << detail::svg_coord(kHeight - 8.0)
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">hour</text>\n";
    os << "<text x=\"16\" y=\"" << detail::svg_coord((kTop + kBottom) / 2.0)
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << detail::svg_coord((kTop + kBottom) / 2.0) << ")\">°C</text>\n";

    const auto polyline = [&](const std::vector<double>& values, const char* color) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) os << ' ';
            os << detail::svg_coord(px(static_cast<double>(i))) << ',' << detail::svg_coord(py(values[i]));
        }
        os << "\"/>\n";
    };
    if (report.has_actual()) polyline(report.actual, "blue");
    polyline(report.predicted, "red");

    // legend
    double ly = kTop + 14.0;
    const auto legend_row = [&](const char* color, const char* label) {
        os << "<line x1=\"" << detail::svg_coord(kRight - 130.0) << "\" y1=\"" << detail::svg_coord(ly - 4.0)
           << "\" x2=\"" << detail::svg_coord(kRight - 100.0) << "\" y2=\"" << detail::svg_coord(ly - 4.0)
           << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << detail::svg_coord(kRight - 94.0) << "\" y=\"" << detail::svg_coord(ly)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
        ly += 18.0;
    };
    legend_row("red", "predicted");
    if (report.has_actual()) legend_row("blue", "actual");

    os << "</svg>\n";
    return os.str();
}

} // namespace thermocast
