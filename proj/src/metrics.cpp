#include "smoe/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace smoe {

double mse(const GrayImage& a, const GrayImage& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double psnr(const GrayImage& a, const GrayImage& b) {
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

namespace {

std::vector<double> gaussian_window(int n, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(n));
    const double mid = (n - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = std::exp(-((i - mid) * (i - mid)) / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Separable weighted local means of `img` over fully interior windows.
// Output is (h - n + 1) x (w - n + 1).
std::vector<double> window_means(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& win) {
    const int n = static_cast<int>(win.size());
    const int ow = w - n + 1;
    const int oh = h - n + 1;
    std::vector<double> horiz(static_cast<std::size_t>(h) * ow);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += win[i] * img[static_cast<std::size_t>(r) * w + c + i];
            horiz[static_cast<std::size_t>(r) * ow + c] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += win[i] * horiz[static_cast<std::size_t>(r + i) * ow + c];
            out[static_cast<std::size_t>(r) * ow + c] = acc;
        }
    }
    return out;
}

}  // namespace

double ssim(const GrayImage& a, const GrayImage& b, const SsimConfig& cfg) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
    if (a.width < cfg.window || a.height < cfg.window) {
        throw std::invalid_argument("ssim: image smaller than window");
    }

    const std::vector<double> win = gaussian_window(cfg.window, cfg.sigma);
    const std::size_t n = a.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a.pixels[i] * a.pixels[i];
        bb[i] = b.pixels[i] * b.pixels[i];
        ab[i] = a.pixels[i] * b.pixels[i];
    }

    const std::vector<double> mu_a = window_means(a.pixels, a.width, a.height, win);
    const std::vector<double> mu_b = window_means(b.pixels, a.width, a.height, win);
    const std::vector<double> e_aa = window_means(aa, a.width, a.height, win);
    const std::vector<double> e_bb = window_means(bb, a.width, a.height, win);
    const std::vector<double> e_ab = window_means(ab, a.width, a.height, win);

    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        acc += num / den;
    }
    return acc / static_cast<double>(mu_a.size());
}

}  // namespace smoe
