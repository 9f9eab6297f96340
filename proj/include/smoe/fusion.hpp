#pragma once

#include <span>
#include <vector>

#include "smoe/model.hpp"

namespace smoe {

// Per-model fusion weights, normalized to sum 1.
struct FusionWeights {
    std::vector<double> weights;
};

// Per-kernel gating mass M_j = sum_m w_j(x_m) over a block's samples. The
// masses sum to the sample count (partition of unity summed over samples).
struct GatingMass {
    std::vector<double> mass;
};

GatingMass gating_mass(const SMoEModel& model, const BlockData& block);

// One-to-one kernel correspondence by greedy nearest-center matching:
// result[j] is the index in `other` matched to anchor kernel j.
std::vector<int> match_kernels(const SMoEModel& anchor, const SMoEModel& other);

// Fuse H models fitted on aligned content: kernels are matched to the first
// model, then every unconstrained parameter is averaged component-wise.
SMoEModel average_parameters(std::span<const SMoEModel> models);

// Element-wise convex combination of H equally shaped prediction matrices.
std::vector<double> average_predictions(const std::vector<std::vector<double>>& predictions,
                                        const FusionWeights& w);

// Reliability weights from gating mass: per model, the estimator variance of
// an expert is noise_var / M_j, so the model's scalar reliability is
// 1 / mean_j(noise_var / M_j). Weights are the normalized reliabilities;
// zero noise variance (or equal masses) yields uniform weights.
FusionWeights reliability_weights(std::span<const SMoEModel> models,
                                  std::span<const BlockData> blocks,
                                  double noise_var);

// Unnormalized scalar reliability of a single model on its block.
double model_reliability(const SMoEModel& model, const BlockData& block, double noise_var);

}  // namespace smoe
