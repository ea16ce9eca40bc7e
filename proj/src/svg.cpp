#include "mbp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace mbp {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 24, kTop = 40, kBottom = 52;

const char* kColors[] = {"#1f6fb4", "#d1495b", "#2e8b57", "#8d6cab",
                         "#c77d2e", "#4ba3a3", "#7a7a2e", "#5a5a5a"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.xs.size(); ++k) {
            xmin = std::min(xmin, s.xs[k]);
            xmax = std::max(xmax, s.xs[k]);
            ymin = std::min(ymin, s.ys[k]);
            ymax = std::max(ymax, s.ys[k]);
        }
    if (!(xmin <= xmax) || !(ymin <= ymax)) throw std::invalid_argument("empty plot");
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight); };
    auto py = [&](double y) {
        return kHeight - kBottom - (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
    };

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write svg: " + path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
       << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n"
       << "<rect width='100%' height='100%' fill='white'/>\n"
       << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
       << "</text>\n";

    // axes + ticks
    os << "<line x1='" << kLeft << "' y1='" << kHeight - kBottom << "' x2='" << kWidth - kRight
       << "' y2='" << kHeight - kBottom << "' stroke='black'/>\n"
       << "<line x1='" << kLeft << "' y1='" << kTop << "' x2='" << kLeft << "' y2='"
       << kHeight - kBottom << "' stroke='black'/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double fx = xmin + (xmax - xmin) * k / 5.0;
        const double fy = ymin + (ymax - ymin) * k / 5.0;
        os << "<line x1='" << px(fx) << "' y1='" << kHeight - kBottom << "' x2='" << px(fx)
           << "' y2='" << kHeight - kBottom + 5 << "' stroke='black'/>\n"
           << "<text x='" << px(fx) << "' y='" << kHeight - kBottom + 20
           << "' text-anchor='middle' font-size='11'>" << num(fx) << "</text>\n"
           << "<line x1='" << kLeft - 5 << "' y1='" << py(fy) << "' x2='" << kLeft << "' y2='"
           << py(fy) << "' stroke='black'/>\n"
           << "<text x='" << kLeft - 8 << "' y='" << py(fy) + 4
           << "' text-anchor='end' font-size='11'>" << num(fy) << "</text>\n";
    }
    os << "<text x='" << (kLeft + kWidth - kRight) / 2 << "' y='" << kHeight - 12
       << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n"
       << "<text x='18' y='" << (kTop + kHeight - kBottom) / 2
       << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
       << (kTop + kHeight - kBottom) / 2 << ")'>" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        os << "<polyline fill='none' stroke='" << kColors[si % 8] << "' stroke-width='1.5' points='";
        for (std::size_t k = 0; k < s.xs.size(); ++k)
            os << num(px(s.xs[k])) << "," << num(py(s.ys[k])) << " ";
        os << "'/>\n";
        os << "<text x='" << kWidth - kRight - 6 << "' y='" << kTop + 16 * (si + 1)
           << "' text-anchor='end' font-size='12' fill='" << kColors[si % 8] << "'>" << s.name
           << "</text>\n";
    }

    if (series.size() == 2 && series[0].xs == series[1].xs && !series[0].xs.empty()) {
        double gap = 0.0, at = series[0].xs[0];
        for (std::size_t k = 0; k < series[0].xs.size(); ++k) {
            const double g = std::abs(series[0].ys[k] - series[1].ys[k]);
            if (g > gap) {
                gap = g;
                at = series[0].xs[k];
            }
        }
        os << "<text x='" << kLeft + 8 << "' y='" << kTop + 16
           << "' font-size='12'>max gap " << num(gap) << " at x=" << num(at) << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace mbp
