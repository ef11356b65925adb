#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hyprl::plot {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

// Minimal deterministic line chart: axes, ticks, one <polyline> per series,
// legend. Output is a pure function of the inputs.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

}  // namespace hyprl::plot
