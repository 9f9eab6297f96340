#include <doctest.h>

#include <cmath>

#include "smoe/metrics.hpp"
#include "smoe/noise.hpp"
#include "smoe/rng.hpp"
#include "smoe/scene.hpp"

using namespace smoe;

namespace {

GrayImage random_image(Rng& rng, int w, int h) {
    GrayImage img(w, h);
    for (double& v : img.pixels) v = rng.uniform(0.0, 1.0);
    return img;
}

// direct per-window evaluation, no separable filtering
double naive_ssim(const GrayImage& a, const GrayImage& b, const SsimConfig& cfg) {
    const int n = cfg.window;
    std::vector<double> win(static_cast<std::size_t>(n) * n);
    const double mid = (n - 1) / 2.0;
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d2 = (i - mid) * (i - mid) + (j - mid) * (j - mid);
            win[i * n + j] = std::exp(-d2 / (2.0 * cfg.sigma * cfg.sigma));
            wsum += win[i * n + j];
        }
    }
    for (double& v : win) v /= wsum;

    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
    double acc = 0.0;
    int count = 0;
    for (int r = 0; r + n <= a.height; ++r) {
        for (int c = 0; c + n <= a.width; ++c) {
            double ma = 0, mb = 0, eaa = 0, ebb = 0, eab = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double w = win[i * n + j];
                    const double va = a.at(r + i, c + j);
                    const double vb = b.at(r + i, c + j);
                    ma += w * va;
                    mb += w * vb;
                    eaa += w * va * va;
                    ebb += w * vb * vb;
                    eab += w * va * vb;
                }
            }
            const double sa = eaa - ma * ma;
            const double sb = ebb - mb * mb;
            const double sab = eab - ma * mb;
            acc += ((2 * ma * mb + c1) * (2 * sab + c2)) /
                   ((ma * ma + mb * mb + c1) * (sa + sb + c2));
            ++count;
        }
    }
    return acc / count;
}

}  // namespace

TEST_CASE("gaussian noise with zero variance is the identity") {
    Rng rng(61);
    const GrayImage img = random_image(rng, 16, 16);
    const GrayImage out = add_gaussian(img, {NoiseKind::gaussian, 0.0, 5});
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("noise synthesis is deterministic per seed") {
    Rng rng(62);
    const GrayImage img = random_image(rng, 32, 32);
    const NoiseSpec spec{NoiseKind::gaussian, 0.01, 123};
    CHECK(add_gaussian(img, spec).pixels == add_gaussian(img, spec).pixels);

    const NoiseSpec other{NoiseKind::gaussian, 0.01, 124};
    CHECK(add_gaussian(img, spec).pixels != add_gaussian(img, other).pixels);

    const NoiseSpec sp{NoiseKind::speckle, 0.01, 123};
    CHECK(add_speckle(img, sp).pixels == add_speckle(img, sp).pixels);
}

TEST_CASE("noise operations reject mismatched kinds") {
    GrayImage img(8, 8, 0.5);
    CHECK_THROWS_AS(add_gaussian(img, {NoiseKind::speckle, 0.01, 1}), std::invalid_argument);
    CHECK_THROWS_AS(add_speckle(img, {NoiseKind::gaussian, 0.01, 1}), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_noise(8, -0.5, 1), std::invalid_argument);
}

TEST_CASE("gaussian noise statistics on a mid-gray image") {
    // 3-sigma bands: mean of N(0, 0.01) over 256^2 samples has sd sigma/256,
    // so |mean| < 3 * 0.1/256 = 0.0012 < 0.002; sample variance concentrates
    // within sqrt(2/N) ~ 0.55% relative, far inside the +-10% band.
    const GrayImage img(256, 256, 0.5);
    const GrayImage noisy = add_gaussian(img, {NoiseKind::gaussian, 0.01, 2024});
    double mean = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) mean += noisy.pixels[i] - img.pixels[i];
    mean /= img.size();
    CHECK(std::abs(mean) < 0.002);

    double var = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double d = noisy.pixels[i] - img.pixels[i] - mean;
        var += d * d;
    }
    var /= (img.size() - 1);
    CHECK(var > 0.009);
    CHECK(var < 0.011);
}

TEST_CASE("speckle noise is multiplicative") {
    const GrayImage zero(16, 16, 0.0);
    const GrayImage out = add_speckle(zero, {NoiseKind::speckle, 0.04, 3});
    for (double v : out.pixels) CHECK(v == 0.0);

    Rng rng(63);
    const GrayImage img = random_image(rng, 16, 16);
    const GrayImage same = add_speckle(img, {NoiseKind::speckle, 0.0, 3});
    CHECK(same.pixels == img.pixels);
}

TEST_CASE("speckle noise variance scales with the squared signal") {
    const GrayImage img(256, 256, 0.5);
    const GrayImage noisy = add_speckle(img, {NoiseKind::speckle, 0.01, 77});
    double var = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double d = noisy.pixels[i] - img.pixels[i];
        var += d * d;
    }
    var /= img.size();
    // var = y^2 * 0.01 = 0.0025 within +-10%
    CHECK(var > 0.00225);
    CHECK(var < 0.00275);
}

TEST_CASE("psnr analytic values") {
    const GrayImage a(32, 32, 0.0);
    GrayImage b(32, 32, 0.1);
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
    GrayImage c(32, 32, std::sqrt(0.001));
    CHECK(psnr(a, c) == doctest::Approx(30.0).epsilon(1e-9));
}

TEST_CASE("psnr of identical images is the infinity sentinel") {
    const GrayImage a(16, 16, 0.3);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(psnr(a, a) > 0);
}

TEST_CASE("psnr is symmetric and validates shapes") {
    Rng rng(64);
    const GrayImage a = random_image(rng, 24, 16);
    const GrayImage b = random_image(rng, 24, 16);
    CHECK(psnr(a, b) == psnr(b, a));
    const GrayImage c(16, 24, 0.0);
    CHECK_THROWS_AS(psnr(a, c), std::invalid_argument);
}

TEST_CASE("ssim of an image with itself is one") {
    Rng rng(65);
    const GrayImage a = random_image(rng, 32, 32);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ssim is symmetric") {
    Rng rng(66);
    const GrayImage a = random_image(rng, 24, 24);
    const GrayImage b = random_image(rng, 24, 24);
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
}

TEST_CASE("ssim of anti-correlated structure is negative") {
    GrayImage a(32, 32);
    for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 32; ++c) a.at(r, c) = ((r / 4 + c / 4) % 2 == 0) ? 1.0 : 0.0;
    }
    GrayImage b = a;
    for (double& v : b.pixels) v = 1.0 - v;
    const double s = ssim(a, b);
    CHECK(s < 0.0);
    CHECK(s >= -1.0);
}

TEST_CASE("ssim rejects images smaller than the window") {
    const GrayImage tiny(10, 10, 0.5);
    CHECK_THROWS_AS(ssim(tiny, tiny), std::invalid_argument);
    const GrayImage a(12, 8, 0.5);
    CHECK_THROWS_AS(ssim(a, a), std::invalid_argument);
}

TEST_CASE("ssim matches the naive sliding-window oracle") {
    const GrayImage clean = synthetic_scene(32);
    const GrayImage noisy = add_gaussian(clean, {NoiseKind::gaussian, 0.01, 99});
    const SsimConfig cfg;
    CHECK(ssim(clean, noisy, cfg) ==
          doctest::Approx(naive_ssim(clean, noisy, cfg)).epsilon(1e-6));

    Rng rng(67);
    const GrayImage a = random_image(rng, 32, 32);
    const GrayImage b = random_image(rng, 32, 32);
    CHECK(ssim(a, b, cfg) == doctest::Approx(naive_ssim(a, b, cfg)).epsilon(1e-6));
}

TEST_CASE("gaussian_noise vector is a pure function of its inputs") {
    const std::vector<double> a = gaussian_noise(1000, 0.04, 5);
    const std::vector<double> b = gaussian_noise(1000, 0.04, 5);
    CHECK(a == b);
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= a.size();
    CHECK(std::abs(mean) < 0.02);  // 3 sigma = 3*0.2/sqrt(1000) = 0.019
}
