#include "hyprl/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hyprl::plot {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!(x_min <= x_max)) throw std::invalid_argument("write_line_chart: no points");
    if (x_min == x_max) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_min == y_max) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto sx = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    const auto sy = [&](double y) {
        return kMarginTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write plot: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    // axes
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        out << "<line x1=\"" << num(sx(fx)) << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
            << num(sx(fx)) << "\" y2=\"" << kMarginTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(sx(fx)) << "\" y=\"" << kMarginTop + plot_h + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(fx) << "</text>\n";
        out << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << num(sy(fy)) << "\" x2=\""
            << kMarginLeft << "\" y2=\"" << num(sy(fy)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(sy(fy) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(fy) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < series[s].points.size(); ++i) {
            if (i) out << ' ';
            out << num(sx(series[s].points[i].first)) << ',' << num(sy(series[s].points[i].second));
        }
        out << "\"/>\n";
        const double ly = kMarginTop + 12 + 18.0 * static_cast<double>(s);
        out << "<line x1=\"" << kWidth - kMarginRight + 10 << "\" y1=\"" << num(ly - 4)
            << "\" x2=\"" << kWidth - kMarginRight + 34 << "\" y2=\"" << num(ly - 4)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - kMarginRight + 40 << "\" y=\"" << num(ly)
            << "\" font-size=\"12\">" << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace hyprl::plot
