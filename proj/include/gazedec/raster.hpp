#pragma once

#include "gazedec/core.hpp"
#include "gazedec/nn/tensor.hpp"

#include <cstddef>
#include <vector>

namespace gazedec {
namespace raster {

struct RenderConfig {
    size_t width = 224;
    size_t height = 224;
    double margin_frac = 0.05;
    double duration_to_diameter = 0.06; // px per ms
    double min_diameter = 3.0;
    double max_diameter = 31.0;
};

// RGB image, planar layout [3][H][W], values in [0,1], black background.
struct ScanpathImage {
    size_t width = 0;
    size_t height = 0;
    std::vector<double> pixels; // 3 * height * width

    double& at(size_t channel, size_t y, size_t x) {
        return pixels[(channel * height + y) * width + x];
    }
    double at(size_t channel, size_t y, size_t x) const {
        return pixels[(channel * height + y) * width + x];
    }
    nn::Tensor to_tensor() const { return nn::Tensor({3, height, width}, pixels); }
};

// Saccade lines colored by class (forward blue, skip green, refixation
// orange, return sweep purple, regression red, other gray); fixation
// disks gray-shaded by temporal order, diameter proportional to
// duration. Elements are painted in temporal order.
ScanpathImage render_scanpath(const Trial& trial, const RenderConfig& config = {});

struct Rgb {
    double r, g, b;
};
Rgb saccade_color(SaccadeClass c);

} // namespace raster
} // namespace gazedec
