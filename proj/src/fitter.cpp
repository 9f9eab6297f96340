#include "smoe/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "smoe/rng.hpp"

namespace smoe {

namespace {

// Nearest overfull grid for L kernels: g x g with g = ceil(sqrt(L)) in 2D,
// L cells in 1D.
int grid_cells_per_axis(int dim, int num_kernels) {
    if (dim == 1) return num_kernels;
    int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_kernels))));
    while (g * g < num_kernels) ++g;  // guard against sqrt rounding
    return g;
}

// Expert of each kernel = mean of the samples whose nearest center it is;
// kernels that attract no samples fall back to the block mean.
void assign_cell_mean_experts(SMoEModel& model, const BlockData& block) {
    const int num = model.num_kernels();
    const int dim = model.dim;
    std::vector<double> sum(static_cast<std::size_t>(num), 0.0);
    std::vector<int> count(static_cast<std::size_t>(num), 0);
    double total = 0.0;
    for (int m = 0; m < block.sample_count(); ++m) {
        const Vec2& x = block.coords[m];
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < num; ++j) {
            const Vec2& c = model.kernels[j].center;
            const double dx0 = x[0] - c[0];
            const double dx1 = dim == 2 ? x[1] - c[1] : 0.0;
            const double d = dx0 * dx0 + dx1 * dx1;
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        sum[best] += block.values[m];
        count[best] += 1;
        total += block.values[m];
    }
    const double block_mean = total / std::max(1, block.sample_count());
    for (int j = 0; j < num; ++j) {
        model.kernels[j].expert = count[j] > 0 ? sum[j] / count[j] : block_mean;
    }
}

// The regression function underdetermines the kernel layout: descent from a
// single init can settle in a decomposition whose loss floor is above the
// generative one. Each fit therefore tries the standard init plus a ladder of
// sharper-precision inits, half of them with center jitter, and keeps the
// best result. Restart transforms are mirror-equivariant: shared scalar
// precision offsets, and center offsets whose magnitude is keyed on the
// folded cell index with the sign taken from the side of the axis.
constexpr int kRestarts = 8;
constexpr double kPrecisionLadder[4] = {0.0, 0.75, 1.5, 2.25};

// Weight of the L2 anchor on mix logits inside the descent objective. The
// gating is invariant under adding a common quadratic in x to every kernel
// activation, which the logits can absorb; without an anchor the iterate
// wanders along that loss-flat orbit and the kernel parameters lose any
// stable meaning. The anchor selects the minimum-logit-norm point of the
// orbit. The reported loss stays plain MSE.
constexpr double kLogitAnchor = 1e-3;

SMoEModel perturbed_init(const SMoEModel& base, const BlockData& block, std::uint64_t seed,
                         int restart) {
    const int dim = base.dim;
    const int num = base.num_kernels();
    const int g = grid_cells_per_axis(dim, num);
    const double cell = 1.0 / g;
    const double dprec = kPrecisionLadder[restart % 4];
    const bool jitter_centers = restart >= 4;

    SMoEModel start = base;
    for (int j = 0; j < num; ++j) {
        KernelParams& k = start.kernels[j];
        k.prec_factor[0] += dprec;
        if (dim == 2) k.prec_factor[2] += dprec;
        if (!jitter_centers) continue;

        const int row = dim == 2 ? j / g : 0;
        const int col = dim == 2 ? j % g : j;
        const int row_m = dim == 2 ? g - 1 - row : 0;
        const int col_m = (dim == 2 ? g : num) - 1 - col;
        Rng rng(derive_seed(seed ^ 0x5eedf17ULL, static_cast<std::uint64_t>(restart),
                            static_cast<std::uint64_t>(std::min(row, row_m)),
                            static_cast<std::uint64_t>(std::min(col, col_m))));
        const double row_mag = rng.uniform(0.1, 0.45) * cell;
        const double col_mag = rng.uniform(0.1, 0.45) * cell;
        if (dim == 2) {
            if (row != row_m) k.center[0] += (row < row_m ? row_mag : -row_mag);
            if (col != col_m) k.center[1] += (col < col_m ? col_mag : -col_mag);
        } else {
            if (col != col_m) k.center[0] += (col < col_m ? col_mag : -col_mag);
        }
    }
    clamp_precision_logs(start);
    assign_cell_mean_experts(start, block);
    return start;
}

struct RunResult {
    std::vector<double> best_theta;
    double best_obj = std::numeric_limits<double>::infinity();
    int iters = 0;
    bool grad_converged = false;
};

// A run stops once this many consecutive iterations bring no relative
// objective improvement; past that point the iterate only wanders along
// objective-flat directions.
constexpr int kPlateauPatience = 60;
constexpr double kPlateauRelImprove = 1e-9;

// Cosine step decay with a floor: full steps early for basin exploration,
// fine steps late so narrow high-precision basins can actually be entered.
double step_at(int t, int max_iters, double step_size) {
    constexpr double kFloor = 0.04;
    const double cosine = 0.5 * (1.0 + std::cos(3.14159265358979323846 * t / max_iters));
    return step_size * (kFloor + (1.0 - kFloor) * cosine);
}

RunResult adam_run(SMoEModel model, const BlockData& block, const FitConfig& cfg) {
    std::vector<double> theta = pack_params(model);
    const std::size_t n = theta.size();
    std::vector<double> grad(n, 0.0);
    std::vector<double> m1(n, 0.0), m2(n, 0.0);
    const double b1 = cfg.moment_decays.first;
    const double b2 = cfg.moment_decays.second;
    const double eps = 1e-8;
    const std::size_t per = params_per_kernel(model.dim);
    const std::size_t dim = static_cast<std::size_t>(model.dim);
    const std::size_t logit_off = dim + (model.dim == 1 ? 1 : 3);

    RunResult out;
    out.best_theta = theta;

    double b1t = 1.0, b2t = 1.0;
    int stalled = 0;
    for (int t = 0; t < cfg.max_iters; ++t) {
        double obj = loss_and_grad(model, block, grad);
        for (std::size_t base = 0; base < n; base += per) {
            const double logit = theta[base + logit_off];
            obj += kLogitAnchor * logit * logit;
            grad[base + logit_off] += 2.0 * kLogitAnchor * logit;
        }
        stalled = obj < out.best_obj * (1.0 - kPlateauRelImprove) ? 0 : stalled + 1;
        if (obj < out.best_obj) {
            out.best_obj = obj;
            out.best_theta = theta;
        }
        out.iters = t + 1;
        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax < cfg.grad_tolerance) {
            out.grad_converged = true;
            break;
        }
        if (stalled >= kPlateauPatience) break;

        const double step = step_at(t, cfg.max_iters, cfg.step_size);
        b1t *= b1;
        b2t *= b2;
        const double c1 = 1.0 / (1.0 - b1t);
        const double c2 = 1.0 / (1.0 - b2t);
        for (std::size_t i = 0; i < n; ++i) {
            m1[i] = b1 * m1[i] + (1.0 - b1) * grad[i];
            m2[i] = b2 * m2[i] + (1.0 - b2) * grad[i] * grad[i];
            theta[i] -= step * (m1[i] * c1) / (std::sqrt(m2[i] * c2) + eps);
        }
        // re-clamp precision log-diagonals in the flat layout
        for (std::size_t base = 0; base < n; base += per) {
            theta[base + dim] = std::clamp(theta[base + dim], kMinLogDiag, kMaxLogDiag);
            if (model.dim == 2) {
                theta[base + dim + 2] = std::clamp(theta[base + dim + 2], kMinLogDiag, kMaxLogDiag);
            }
        }
        unpack_params_into(theta, model);
    }

    // the last step's iterate was never scored inside the loop
    unpack_params_into(theta, model);
    double final_obj = loss_mse(model, block);
    for (std::size_t base = 0; base < n; base += per) {
        final_obj += kLogitAnchor * theta[base + logit_off] * theta[base + logit_off];
    }
    if (final_obj < out.best_obj) {
        out.best_obj = final_obj;
        out.best_theta = theta;
    }
    return out;
}

}  // namespace

SMoEModel init_model(const BlockData& block, int num_kernels) {
    if (num_kernels < 1) throw std::invalid_argument("init_model: num_kernels must be >= 1");
    const int dim = block.dim;
    const int g = grid_cells_per_axis(dim, num_kernels);

    SMoEModel model;
    model.dim = dim;
    model.kernels.resize(static_cast<std::size_t>(num_kernels));

    // First L cells in scan order (row-major for 2D); isotropic bandwidth
    // 1/(2 sqrt(L)) in normalized units.
    const double log_diag = std::log(2.0 * std::sqrt(static_cast<double>(num_kernels)));
    for (int j = 0; j < num_kernels; ++j) {
        KernelParams& k = model.kernels[j];
        if (dim == 1) {
            k.center = {pixel_center_coord(j, g), 0.0};
        } else {
            k.center = {pixel_center_coord(j / g, g), pixel_center_coord(j % g, g)};
        }
        k.prec_factor = {log_diag, 0.0, dim == 2 ? log_diag : 0.0};
        k.mix_logit = 0.0;
    }
    assign_cell_mean_experts(model, block);
    return model;
}

double loss_mse(const SMoEModel& model, const BlockData& block) {
    double acc = 0.0;
    for (int m = 0; m < block.sample_count(); ++m) {
        const double r = predict(block.coords[m], model) - block.values[m];
        acc += r * r;
    }
    return acc / block.sample_count();
}

double loss_and_grad(const SMoEModel& model, const BlockData& block,
                     std::vector<double>& grad) {
    const int dim = model.dim;
    const int num = model.num_kernels();
    const int samples = block.sample_count();
    const std::size_t per = params_per_kernel(dim);
    grad.assign(per * static_cast<std::size_t>(num), 0.0);

    thread_local std::vector<PrecFactor> factors;
    thread_local std::vector<double> expz, u0s, u1s;
    factors.resize(static_cast<std::size_t>(num));
    expz.resize(static_cast<std::size_t>(num));
    u0s.resize(static_cast<std::size_t>(num));
    u1s.resize(static_cast<std::size_t>(num));
    for (int j = 0; j < num; ++j) factors[j] = materialize_factor(model.kernels[j]);

    double acc = 0.0;
    const double inv_m = 1.0 / samples;
    for (int m = 0; m < samples; ++m) {
        const Vec2& x = block.coords[m];

        // forward: z_j = logit_j - |R^T (x - c)|^2, softmax in ratio form
        double zmax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < num; ++j) {
            const KernelParams& k = model.kernels[j];
            const PrecFactor& r = factors[j];
            const double dx0 = x[0] - k.center[0];
            const double dx1 = dim == 2 ? x[1] - k.center[1] : 0.0;
            const double u0 = dim == 2 ? r.d0 * dx0 + r.off * dx1 : r.d0 * dx0;
            const double u1 = dim == 2 ? r.d1 * dx1 : 0.0;
            u0s[j] = u0;
            u1s[j] = u1;
            const double z = k.mix_logit - (u0 * u0 + u1 * u1);
            expz[j] = z;
            zmax = std::max(zmax, z);
        }
        double denom = 0.0;
        double numer = 0.0;
        for (int j = 0; j < num; ++j) {
            expz[j] = std::exp(expz[j] - zmax);
            denom += expz[j];
            numer += model.kernels[j].expert * expz[j];
        }
        const double f = numer / denom;
        const double resid = f - block.values[m];
        acc += resid * resid;

        // backward: dL/df = 2 resid / M; df/dz_j = w_j (m_j - f); df/dm_j = w_j
        const double coef = 2.0 * inv_m * resid;
        std::size_t base = 0;
        for (int j = 0; j < num; ++j, base += per) {
            const KernelParams& k = model.kernels[j];
            const PrecFactor& r = factors[j];
            const double w = expz[j] / denom;
            const double a = w * (k.expert - f);  // df/dz_j
            const double dx0 = x[0] - k.center[0];
            const double u0 = u0s[j];
            if (dim == 1) {
                // dz/dc0 = 2 (R u)_0 ; dz/dlog_r00 = -2 u0 dx0 r00
                grad[base + 0] += coef * a * 2.0 * r.d0 * u0;
                grad[base + 1] += coef * a * (-2.0 * u0 * dx0 * r.d0);
                grad[base + 2] += coef * a;  // mix logit
                grad[base + 3] += coef * w;  // expert
            } else {
                const double dx1 = x[1] - k.center[1];
                const double u1 = u1s[j];
                grad[base + 0] += coef * a * 2.0 * r.d0 * u0;
                grad[base + 1] += coef * a * 2.0 * (r.off * u0 + r.d1 * u1);
                grad[base + 2] += coef * a * (-2.0 * u0 * dx0 * r.d0);  // log R00
                grad[base + 3] += coef * a * (-2.0 * u0 * dx1);         // R10
                grad[base + 4] += coef * a * (-2.0 * u1 * dx1 * r.d1);  // log R11
                grad[base + 5] += coef * a;
                grad[base + 6] += coef * w;
            }
        }
    }
    return acc * inv_m;
}

std::vector<double> grad_loss(const SMoEModel& model, const BlockData& block) {
    std::vector<double> grad;
    loss_and_grad(model, block, grad);
    return grad;
}

std::pair<SMoEModel, FitReport> fit_block(const BlockData& block, const FitConfig& cfg) {
    if (block.sample_count() < 1) throw std::invalid_argument("fit_block: empty block");
    if (cfg.max_iters < 1) throw std::invalid_argument("fit_block: max_iters must be >= 1");
    if (cfg.step_size <= 0.0) throw std::invalid_argument("fit_block: step_size must be > 0");

    const SMoEModel base = init_model(block, cfg.num_kernels);

    RunResult best;
    int total_iters = 0;
    for (int restart = 0; restart < kRestarts; ++restart) {
        const SMoEModel start =
            restart == 0 ? base : perturbed_init(base, block, cfg.seed, restart);
        RunResult run = adam_run(start, block, cfg);
        total_iters += run.iters;
        if (run.best_obj < best.best_obj) best = std::move(run);
        // a gradient-converged exact fit cannot be improved on
        if (best.grad_converged && best.best_obj == 0.0) break;
    }

    SMoEModel model = base;
    unpack_params_into(best.best_theta, model);

    FitReport report;
    report.final_loss = loss_mse(model, block);
    report.iters_used = total_iters;
    std::vector<double> grad;
    loss_and_grad(model, block, grad);
    for (double g : grad) report.grad_norm = std::max(report.grad_norm, std::abs(g));
    return {std::move(model), report};
}

}  // namespace smoe
