#pragma once

#include "smoe/image.hpp"

namespace smoe {

double mse(const GrayImage& a, const GrayImage& b);

// 10 log10(1 / MSE) with peak 1.0; identical images give +infinity.
double psnr(const GrayImage& a, const GrayImage& b);

// Standard SSIM construction; all constants visible so alternative window
// conventions can be compared.
struct SsimConfig {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

// Mean local SSIM over all fully interior windows. Images smaller than the
// window are rejected.
double ssim(const GrayImage& a, const GrayImage& b, const SsimConfig& cfg = SsimConfig{});

}  // namespace smoe
