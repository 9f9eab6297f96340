#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace smoe {

// Point in normalized block coordinates. Only the first `dim` entries are
// meaningful; for 1D signals the second component stays zero.
using Vec2 = std::array<double, 2>;

// Clamp range for the log-diagonal of the precision factor. Keeps kernels
// away from degenerate needle/flat shapes and makes Sigma^-1 = R R^T
// structurally positive definite.
inline const double kMinLogDiag = std::log(1e-2);
inline const double kMaxLogDiag = std::log(1e3);

// One gating kernel plus its expert, in unconstrained form.
//
// prec_factor holds the lower-triangular factor R of the precision matrix
// Sigma^-1 = R R^T, row-major over the lower triangle, with diagonal entries
// stored as logarithms:
//   1D: [log r00]
//   2D: [log r00, r10, log r11]
// mix_logit maps to the mixing weight pi_j through normalized exponentials
// across the model's kernels.
struct KernelParams {
    Vec2 center{0.0, 0.0};
    std::array<double, 3> prec_factor{0.0, 0.0, 0.0};
    double mix_logit = 0.0;
    double expert = 0.0;
};

// Mixture-of-experts regression model: L kernels over 1D or 2D inputs.
struct SMoEModel {
    std::vector<KernelParams> kernels;
    int dim = 2;

    int num_kernels() const { return static_cast<int>(kernels.size()); }
};

// Sample pairs of one block: M coordinates with observed intensities.
struct BlockData {
    std::vector<Vec2> coords;
    std::vector<double> values;
    int origin_row = 0;
    int origin_col = 0;
    int size = 0;  // block edge length in pixels (1D: sample count)
    int dim = 2;

    int sample_count() const { return static_cast<int>(values.size()); }
};

// Pixel index -> normalized coordinate along an axis of length `axis_len`.
// Pixel centers sit at (i + 0.5) / len, so geometry is block-size independent.
inline double pixel_center_coord(int index, int axis_len) {
    return (static_cast<double>(index) + 0.5) / static_cast<double>(axis_len);
}

// Materialized lower-triangular factor R (diagonal exponentiated).
struct PrecFactor {
    double d0 = 1.0;   // R(0,0)
    double off = 0.0;  // R(1,0)
    double d1 = 1.0;   // R(1,1)
};

inline PrecFactor materialize_factor(const KernelParams& k) {
    return {std::exp(k.prec_factor[0]), k.prec_factor[1], std::exp(k.prec_factor[2])};
}

// (x - c)^T R R^T (x - c), evaluated via u = R^T (x - c).
inline double quad_form(const PrecFactor& r, const Vec2& diff, int dim) {
    if (dim == 1) {
        const double u0 = r.d0 * diff[0];
        return u0 * u0;
    }
    const double u0 = r.d0 * diff[0] + r.off * diff[1];
    const double u1 = r.d1 * diff[1];
    return u0 * u0 + u1 * u1;
}

// Sigma^-1 = R R^T as a row-major dim x dim matrix (padded to 2x2 storage).
std::array<double, 4> precision_matrix(const KernelParams& k, int dim);

// Steered Gaussian kernel value exp(-(x-c)^T Sigma^-1 (x-c)), in (0, 1].
double eval_kernel(const Vec2& x, const KernelParams& k, int dim);

// Normalized mixing weights pi_j (softmax over mix logits).
std::vector<double> mixing_weights(const SMoEModel& model);

// Gating weights w_j(x) = pi_j K_j(x) / sum_l pi_l K_l(x). Computed in the
// log domain with max-subtraction, so the result never underflows to an
// all-zero vector.
std::vector<double> gating_weights(const Vec2& x, const SMoEModel& model);
void gating_weights(const Vec2& x, const SMoEModel& model, std::vector<double>& out);

// Regression function y(x) = sum_j m_j w_j(x). Always inside
// [min_j m_j, max_j m_j]. Evaluated in ratio form so that a model whose
// experts are all equal reproduces that constant exactly.
double predict(const Vec2& x, const SMoEModel& model);

// Model sampled at pixel centers: 2D -> size x size row-major matrix,
// 1D -> length-size vector. No clamping here; that happens only at final
// image assembly.
std::vector<double> predict_block(const SMoEModel& model, int size);

// Flat unconstrained parameter vector. Per-kernel layout, kernels in order:
//   [center (dim), prec_factor (dim*(dim+1)/2, as stored), mix_logit, expert]
std::size_t params_per_kernel(int dim);
std::vector<double> pack_params(const SMoEModel& model);
SMoEModel unpack_params(const std::vector<double>& theta, int dim, int num_kernels);
void unpack_params_into(const std::vector<double>& theta, SMoEModel& model);

// Project the log-diagonal entries of every kernel's precision factor into
// [kMinLogDiag, kMaxLogDiag].
void clamp_precision_logs(SMoEModel& model);

// Human-readable dump, one kernel per stanza (schema in README).
std::string model_to_text(const SMoEModel& model);

}  // namespace smoe
