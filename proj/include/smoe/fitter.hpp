#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smoe/model.hpp"

namespace smoe {

struct FitConfig {
    int num_kernels = 4;      // 3 is the usual choice for 1D signals
    int max_iters = 400;
    double step_size = 0.05;
    std::pair<double, double> moment_decays{0.9, 0.999};
    double grad_tolerance = 1e-6;  // early stop on gradient inf-norm
    std::uint64_t seed = 0;
};

struct FitReport {
    double final_loss = 0.0;
    int iters_used = 0;
    double grad_norm = 0.0;
};

// Deterministic initialization: centers on a regular grid of cell midpoints
// (nearest overfull grid when L is not a square, extra cells skipped in scan
// order), experts set to the mean of the samples nearest each center,
// isotropic precision with bandwidth 1/(2 sqrt(L)), uniform mix logits.
SMoEModel init_model(const BlockData& block, int num_kernels);

// (1/M) sum_m (f(x_m) - y_m)^2
double loss_mse(const SMoEModel& model, const BlockData& block);

// Analytic gradient of loss_mse with respect to every unconstrained
// parameter, in pack_params order. `loss_and_grad` computes both in one pass
// over the samples.
std::vector<double> grad_loss(const SMoEModel& model, const BlockData& block);
double loss_and_grad(const SMoEModel& model, const BlockData& block,
                     std::vector<double>& grad);

// Full-batch gradient descent with per-parameter adaptive step scaling from
// running first/second gradient-moment estimates. Precision log-diagonals are
// re-clamped after every update. Returns the best-seen iterate, so the
// result's loss never exceeds the initialization's.
std::pair<SMoEModel, FitReport> fit_block(const BlockData& block, const FitConfig& cfg);

}  // namespace smoe
