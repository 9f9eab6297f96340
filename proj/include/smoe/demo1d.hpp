#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "smoe/fitter.hpp"
#include "smoe/model.hpp"

namespace smoe {

// 1D small-sample experiment: sample a known 3-kernel signal under noise,
// fit single models, and fuse groups of H fits by parameter averaging.
struct Demo1DConfig {
    SMoEModel ground_truth;            // dim 1; see demo_ground_truth()
    std::vector<int> sample_counts{3000, 32};
    std::vector<double> noise_vars{0.15, 0.05};
    int fusion_count = 10;  // H models per fused estimate
    int trials = 1;
    std::uint64_t seed = 0;
};

// Default 3-kernel 1D signal: one sharp and one smooth region boundary.
SMoEModel demo_ground_truth();

struct Demo1DScenario {
    int sample_count = 0;
    double noise_var = 0.0;
    SMoEModel truth;
    std::vector<std::vector<SMoEModel>> fits;  // [trial][h]
    std::vector<SMoEModel> fused;              // [trial]

    // dense curves at eval_points coordinates (trial 0)
    std::vector<double> eval_points;
    std::vector<double> y_true, y_single, y_fused;
    std::vector<std::vector<double>> gates_true;   // [kernel][point]
    std::vector<std::vector<double>> gates_fused;  // [kernel][point]

    // the first trial's first noisy realization
    std::vector<double> sample_x, sample_y;
};

struct Demo1DResult {
    std::vector<Demo1DScenario> scenarios;
};

Demo1DResult run_demo(const Demo1DConfig& cfg);

// Plain-text tabular outputs, one file pair per scenario (schema in README).
void write_demo_outputs(const Demo1DResult& result, const std::filesystem::path& out_dir);

// Greedy nearest-center RMSE helpers shared by the demo's consumers.
double center_rmse(const SMoEModel& truth, const SMoEModel& fitted);
double expert_rmse(const SMoEModel& truth, const SMoEModel& fitted);

// Equispaced noisy samples of a 1D model: coords (i + 0.5) / M.
BlockData sample_1d(const SMoEModel& truth, int sample_count, double noise_var,
                    std::uint64_t seed);

}  // namespace smoe
