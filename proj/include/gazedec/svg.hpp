#pragma once

#include <string>
#include <vector>

namespace gazedec {
namespace svg {

struct Curve {
    std::string label;
    std::vector<std::pair<double, double>> points; // x, y in data units
};

// Static line chart on a [0,1]x[0,1] data range (ROC-style).
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Curve>& curves);

struct CoefficientEntry {
    std::string name;
    double value = 0.0;
    double ci_half_width = 0.0;
    std::string stars; // significance marker, may be empty
};

// Horizontal coefficient plot with CI whiskers.
void write_coefficient_chart(const std::string& path, const std::string& title,
                             const std::vector<CoefficientEntry>& entries);

} // namespace svg
} // namespace gazedec
