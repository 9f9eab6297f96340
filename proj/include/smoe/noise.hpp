#pragma once

#include <cstdint>
#include <vector>

#include "smoe/image.hpp"

namespace smoe {

enum class NoiseKind { gaussian, speckle };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double variance = 0.0;
    std::uint64_t seed = 0;
};

// n independent zero-mean normal deviates with the given variance,
// a pure function of (n, variance, seed).
std::vector<double> gaussian_noise(std::size_t n, double variance, std::uint64_t seed);

// y + eps, clamped to [0, 1]
GrayImage add_gaussian(const GrayImage& img, const NoiseSpec& spec);

// y + y * eps (multiplicative), clamped to [0, 1]
GrayImage add_speckle(const GrayImage& img, const NoiseSpec& spec);

GrayImage add_noise(const GrayImage& img, const NoiseSpec& spec);

const char* noise_kind_name(NoiseKind kind);

}  // namespace smoe
