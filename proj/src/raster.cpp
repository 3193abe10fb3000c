#include "gazedec/raster.hpp"

#include "gazedec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gazedec {
namespace raster {

namespace {

void put_pixel(ScanpathImage& img, long x, long y, const Rgb& c) {
    if (x < 0 || y < 0 || x >= static_cast<long>(img.width) || y >= static_cast<long>(img.height))
        return;
    img.at(0, static_cast<size_t>(y), static_cast<size_t>(x)) = c.r;
    img.at(1, static_cast<size_t>(y), static_cast<size_t>(x)) = c.g;
    img.at(2, static_cast<size_t>(y), static_cast<size_t>(x)) = c.b;
}

void draw_line(ScanpathImage& img, double x0, double y0, double x1, double y1, const Rgb& c) {
    long ix0 = std::lround(x0), iy0 = std::lround(y0);
    const long ix1 = std::lround(x1), iy1 = std::lround(y1);
    const long dx = std::abs(ix1 - ix0), dy = -std::abs(iy1 - iy0);
    const long sx = ix0 < ix1 ? 1 : -1, sy = iy0 < iy1 ? 1 : -1;
    long err = dx + dy;
    for (;;) {
        put_pixel(img, ix0, iy0, c);
        if (ix0 == ix1 && iy0 == iy1) break;
        const long e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            ix0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            iy0 += sy;
        }
    }
}

void draw_disk(ScanpathImage& img, double cx, double cy, double diameter, const Rgb& c) {
    const double r = diameter / 2.0;
    const long x_lo = std::lround(cx - r), x_hi = std::lround(cx + r);
    const long y_lo = std::lround(cy - r), y_hi = std::lround(cy + r);
    for (long y = y_lo; y <= y_hi; ++y) {
        for (long x = x_lo; x <= x_hi; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r * r) put_pixel(img, x, y, c);
        }
    }
}

} // namespace

Rgb saccade_color(SaccadeClass c) {
    switch (c) {
        case SaccadeClass::Forward: return {0.15, 0.35, 0.95};     // blue
        case SaccadeClass::Skip: return {0.10, 0.80, 0.25};        // green
        case SaccadeClass::Refixation: return {1.00, 0.60, 0.10};  // orange
        case SaccadeClass::ReturnSweep: return {0.60, 0.20, 0.80}; // purple
        case SaccadeClass::Regression: return {0.90, 0.15, 0.15};  // red
        case SaccadeClass::Other: return {0.55, 0.55, 0.55};       // gray
    }
    return {0.55, 0.55, 0.55};
}

ScanpathImage render_scanpath(const Trial& trial, const RenderConfig& cfg) {
    if (cfg.width == 0 || cfg.height == 0 || cfg.duration_to_diameter <= 0 ||
        cfg.min_diameter <= 0 || cfg.max_diameter < cfg.min_diameter || cfg.margin_frac < 0 ||
        cfg.margin_frac >= 0.5)
        throw compute_error(ErrorKind::InvalidConfig, "render: invalid canvas configuration");

    ScanpathImage img;
    img.width = cfg.width;
    img.height = cfg.height;
    img.pixels.assign(3 * cfg.width * cfg.height, 0.0);

    const auto& fx = trial.fixations;
    double min_x = fx[0].x, max_x = fx[0].x, min_y = fx[0].y, max_y = fx[0].y;
    for (const Fixation& f : fx) {
        min_x = std::min(min_x, f.x);
        max_x = std::max(max_x, f.x);
        min_y = std::min(min_y, f.y);
        max_y = std::max(max_y, f.y);
    }

    const double usable_w = cfg.width * (1.0 - 2.0 * cfg.margin_frac);
    const double usable_h = cfg.height * (1.0 - 2.0 * cfg.margin_frac);
    auto map_x = [&](double x) {
        if (max_x == min_x) return cfg.width / 2.0;
        return cfg.margin_frac * cfg.width + (x - min_x) / (max_x - min_x) * usable_w;
    };
    auto map_y = [&](double y) {
        if (max_y == min_y) return cfg.height / 2.0;
        return cfg.margin_frac * cfg.height + (y - min_y) / (max_y - min_y) * usable_h;
    };

    const size_t n = fx.size();
    auto disk_color = [&](size_t order) {
        const double intensity =
            n > 1 ? 0.3 + 0.7 * (static_cast<double>(order) / static_cast<double>(n - 1)) : 1.0;
        return Rgb{intensity, intensity, intensity};
    };
    auto diameter = [&](double duration) {
        return std::clamp(cfg.duration_to_diameter * duration, cfg.min_diameter, cfg.max_diameter);
    };

    draw_disk(img, map_x(fx[0].x), map_y(fx[0].y), diameter(fx[0].duration_ms), disk_color(0));
    for (size_t i = 1; i < n; ++i) {
        const SaccadeClass cls = classify_saccade(fx[i - 1], fx[i], trial.words());
        draw_line(img, map_x(fx[i - 1].x), map_y(fx[i - 1].y), map_x(fx[i].x), map_y(fx[i].y),
                  saccade_color(cls));
        draw_disk(img, map_x(fx[i].x), map_y(fx[i].y), diameter(fx[i].duration_ms), disk_color(i));
    }
    return img;
}

} // namespace raster
} // namespace gazedec
