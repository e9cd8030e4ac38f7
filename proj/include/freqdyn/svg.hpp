#pragma once

#include <string>
#include <utility>
#include <vector>

namespace freqdyn {

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Minimal line plot: axes, ticks, one polyline per series. log_x plots
// log10 of the abscissa. Deterministic output.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series, bool log_x = false);

}  // namespace freqdyn
