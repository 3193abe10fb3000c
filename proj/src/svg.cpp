#include "gazedec/svg.hpp"

#include "gazedec/csv.hpp"
#include "gazedec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace gazedec {
namespace svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error(ErrorKind::IoError, "cannot write " + path);
    return out;
}

std::string num(double v) { return format_double(std::round(v * 100.0) / 100.0); }

} // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Curve>& curves) {
    const double w = 480, h = 420, left = 60, top = 40, right = 20, bottom = 50;
    const double pw = w - left - right, ph = h - top - bottom;
    auto px = [&](double x) { return left + x * pw; };
    auto py = [&](double y) { return top + (1.0 - y) * ph; };

    std::ofstream out = open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";

    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        out << "<line x1='" << px(0) << "' y1='" << py(v) << "' x2='" << px(1) << "' y2='" << py(v)
            << "' stroke='#dddddd'/>\n";
        out << "<text x='" << px(0) - 8 << "' y='" << py(v) + 4
            << "' text-anchor='end' font-size='10'>" << num(v) << "</text>\n";
        out << "<text x='" << px(v) << "' y='" << py(0) + 16
            << "' text-anchor='middle' font-size='10'>" << num(v) << "</text>\n";
    }
    out << "<line x1='" << px(0) << "' y1='" << py(0) << "' x2='" << px(1) << "' y2='" << py(1)
        << "' stroke='#bbbbbb' stroke-dasharray='4,3'/>\n";

    for (size_t c = 0; c < curves.size(); ++c) {
        const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : curves[c].points) out << num(px(x)) << "," << num(py(y)) << " ";
        out << "'/>\n";
        out << "<text x='" << px(0.62) << "' y='" << top + 14.0 * (static_cast<double>(c) + 1)
            << "' font-size='10' fill='" << color << "'>" << curves[c].label << "</text>\n";
    }
    out << "<rect x='" << left << "' y='" << top << "' width='" << pw << "' height='" << ph
        << "' fill='none' stroke='#333333'/>\n";
    out << "</svg>\n";
}

void write_coefficient_chart(const std::string& path, const std::string& title,
                             const std::vector<CoefficientEntry>& entries) {
    const double row_h = 26, left = 170, right = 40, top = 50;
    const double h = top + row_h * static_cast<double>(entries.size()) + 30;
    const double w = 560;
    const double pw = w - left - right;

    double max_abs = 1e-9;
    for (const auto& e : entries)
        max_abs = std::max(max_abs, std::abs(e.value) + std::abs(e.ci_half_width));
    auto px = [&](double v) { return left + (v + max_abs) / (2 * max_abs) * pw; };

    std::ofstream out = open_out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='22' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";
    out << "<line x1='" << px(0) << "' y1='" << top - 10 << "' x2='" << px(0) << "' y2='"
        << h - 24 << "' stroke='#999999' stroke-dasharray='4,3'/>\n";

    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const double y = top + row_h * (static_cast<double>(i) + 0.5);
        out << "<text x='" << left - 8 << "' y='" << y + 4
            << "' text-anchor='end' font-size='11'>" << e.name << "</text>\n";
        out << "<line x1='" << px(e.value - e.ci_half_width) << "' y1='" << y << "' x2='"
            << px(e.value + e.ci_half_width) << "' y2='" << y
            << "' stroke='#1f77b4' stroke-width='2'/>\n";
        out << "<circle cx='" << px(e.value) << "' cy='" << y << "' r='4' fill='"
            << (e.stars.empty() ? "#aaaaaa" : "#1f77b4") << "'/>\n";
        if (!e.stars.empty())
            out << "<text x='" << px(e.value) + 8 << "' y='" << y - 6 << "' font-size='11'>"
                << e.stars << "</text>\n";
    }
    out << "<text x='" << px(0) << "' y='" << h - 8
        << "' text-anchor='middle' font-size='10'>coefficient (z-normalized predictors)</text>\n";
    out << "</svg>\n";
}

} // namespace svg
} // namespace gazedec
