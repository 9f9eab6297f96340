#include "smoe/scene.hpp"

#include <cmath>

namespace smoe {

GrayImage synthetic_scene(int size) {
    constexpr double kPi = 3.14159265358979323846;
    GrayImage img(size, size);
    for (int r = 0; r < size; ++r) {
        const double y = (r + 0.5) / size;
        for (int c = 0; c < size; ++c) {
            const double x = (c + 0.5) / size;

            double v = 0.30 + 0.30 * (0.6 * x + 0.4 * y);

            const double dx = x - 0.32;
            const double dy = y - 0.30;
            const double rr = dx * dx + dy * dy;
            if (rr < 0.20 * 0.20) v = 0.82 - 0.9 * rr;  // shaded disk, sharp rim

            if (x > 0.58 && x < 0.86 && y > 0.14 && y < 0.38) v = 0.16 + 0.1 * (x - 0.58);

            if (y > 0.62 + 0.25 * x) v = std::min(v, 0.35 + 0.2 * x);

            const double bx = x - 0.70;
            const double by = y - 0.72;
            v += 0.28 * std::exp(-(bx * bx + by * by) / (2.0 * 0.012));

            v += 0.035 * std::sin(2.0 * kPi * 7.0 * x) * std::sin(2.0 * kPi * 5.0 * y);

            img.at(r, c) = clamp01(v);
        }
    }
    return img;
}

}  // namespace smoe
