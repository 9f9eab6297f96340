#include "smoe/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "smoe/rng.hpp"

namespace smoe {

std::vector<double> gaussian_noise(std::size_t n, double variance, std::uint64_t seed) {
    if (variance < 0.0) throw std::invalid_argument("gaussian_noise: negative variance");
    std::vector<double> out(n, 0.0);
    if (variance == 0.0) return out;
    const double sigma = std::sqrt(variance);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) out[i] = sigma * rng.normal();
    return out;
}

GrayImage add_gaussian(const GrayImage& img, const NoiseSpec& spec) {
    if (spec.kind != NoiseKind::gaussian) {
        throw std::invalid_argument("add_gaussian: spec kind is not gaussian");
    }
    const std::vector<double> eps = gaussian_noise(img.size(), spec.variance, spec.seed);
    GrayImage out = img;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.pixels[i] = clamp01(img.pixels[i] + eps[i]);
    }
    return out;
}

GrayImage add_speckle(const GrayImage& img, const NoiseSpec& spec) {
    if (spec.kind != NoiseKind::speckle) {
        throw std::invalid_argument("add_speckle: spec kind is not speckle");
    }
    const std::vector<double> eps = gaussian_noise(img.size(), spec.variance, spec.seed);
    GrayImage out = img;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.pixels[i] = clamp01(img.pixels[i] + img.pixels[i] * eps[i]);
    }
    return out;
}

GrayImage add_noise(const GrayImage& img, const NoiseSpec& spec) {
    return spec.kind == NoiseKind::gaussian ? add_gaussian(img, spec) : add_speckle(img, spec);
}

const char* noise_kind_name(NoiseKind kind) {
    return kind == NoiseKind::gaussian ? "gaussian" : "speckle";
}

}  // namespace smoe
