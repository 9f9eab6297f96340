#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace smoe {

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Grayscale image, row-major, intensities in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }

    std::size_t size() const { return pixels.size(); }

    bool same_shape(const GrayImage& other) const {
        return width == other.width && height == other.height;
    }
};

}  // namespace smoe
