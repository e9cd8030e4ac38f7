#include "freqdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "freqdyn/util.hpp"

namespace freqdyn {

namespace {
const char* kColors[] = {"#1f6fb2", "#c44e52", "#55a868", "#8172b2", "#ccb974", "#64b5cd"};
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series, bool log_x) {
    const double W = 800, H = 500, L = 70, R = 20, T = 40, B = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            const double px = log_x ? std::log10(std::max(x, 1e-300)) : x;
            xmin = std::min(xmin, px);
            xmax = std::max(xmax, px);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    const auto X = [&](double x) {
        const double px = log_x ? std::log10(std::max(x, 1e-300)) : x;
        return L + (px - xmin) / (xmax - xmin) * (W - L - R);
    };
    const auto Y = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("svg: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
        << "</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        const double px = L + (W - L - R) * i / 5.0;
        const double py = H - B - (H - T - B) * i / 5.0;
        out << "<line x1=\"" << px << "\" y1=\"" << H - B << "\" x2=\"" << px << "\" y2=\""
            << H - B + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << H - B + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt12(log_x ? std::pow(10.0, fx) : fx).substr(0, 9)
            << "</text>\n";
        out << "<line x1=\"" << L - 5 << "\" y1=\"" << py << "\" x2=\"" << L << "\" y2=\"" << py
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << L - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt12(fy).substr(0, 9) << "</text>\n";
    }
    size_t ci = 0;
    for (const auto& s : series) {
        const char* color = kColors[ci++ % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.points) out << X(x) << "," << Y(y) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << W - R - 5 << "\" y=\"" << T + 16 * (double)ci
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << s.name
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace freqdyn
