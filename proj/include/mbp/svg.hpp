#pragma once

#include <string>
#include <vector>

namespace mbp {

struct SvgSeries {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Minimal dependency-free line plot: axes, ticks, legend, one polyline per
/// series.  When exactly two series share their x values the maximum vertical
/// gap is annotated (CDF-overlay diagnostics).
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series);

}  // namespace mbp
