#include "smoe/demo1d.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "smoe/fusion.hpp"
#include "smoe/image.hpp"
#include "smoe/noise.hpp"
#include "smoe/rng.hpp"

namespace smoe {

SMoEModel demo_ground_truth() {
    SMoEModel truth;
    truth.dim = 1;
    truth.kernels.resize(3);
    const double centers[3] = {0.2, 0.5, 0.8};
    const double experts[3] = {0.2, 0.9, 0.4};
    // sharp left boundary, smooth right one; the spread of precisions keeps
    // the kernel layout identifiable from samples
    const double factor_diag[3] = {25.0, 10.0, 6.0};
    for (int j = 0; j < 3; ++j) {
        truth.kernels[j].center = {centers[j], 0.0};
        truth.kernels[j].prec_factor = {std::log(factor_diag[j]), 0.0, 0.0};
        truth.kernels[j].mix_logit = 0.0;
        truth.kernels[j].expert = experts[j];
    }
    return truth;
}

BlockData sample_1d(const SMoEModel& truth, int sample_count, double noise_var,
                    std::uint64_t seed) {
    BlockData block;
    block.dim = 1;
    block.size = sample_count;
    block.coords.resize(static_cast<std::size_t>(sample_count));
    block.values.resize(static_cast<std::size_t>(sample_count));
    const std::vector<double> eps = gaussian_noise(block.values.size(), noise_var, seed);
    for (int m = 0; m < sample_count; ++m) {
        const Vec2 x{pixel_center_coord(m, sample_count), 0.0};
        block.coords[m] = x;
        block.values[m] = clamp01(predict(x, truth) + eps[m]);
    }
    return block;
}

namespace {

double param_rmse(const SMoEModel& truth, const SMoEModel& fitted, bool centers) {
    const std::vector<int> idx = match_kernels(truth, fitted);
    double acc = 0.0;
    for (int j = 0; j < truth.num_kernels(); ++j) {
        const double t = centers ? truth.kernels[j].center[0] : truth.kernels[j].expert;
        const double f = centers ? fitted.kernels[idx[j]].center[0]
                                 : fitted.kernels[idx[j]].expert;
        acc += (t - f) * (t - f);
    }
    return std::sqrt(acc / truth.num_kernels());
}

}  // namespace

double center_rmse(const SMoEModel& truth, const SMoEModel& fitted) {
    return param_rmse(truth, fitted, true);
}

double expert_rmse(const SMoEModel& truth, const SMoEModel& fitted) {
    return param_rmse(truth, fitted, false);
}

Demo1DResult run_demo(const Demo1DConfig& cfg) {
    if (cfg.ground_truth.dim != 1 || cfg.ground_truth.num_kernels() < 1) {
        throw std::invalid_argument("run_demo: ground truth must be a nonempty 1D model");
    }
    if (cfg.sample_counts.size() != cfg.noise_vars.size()) {
        throw std::invalid_argument("run_demo: sample_counts/noise_vars length mismatch");
    }
    if (cfg.fusion_count < 1 || cfg.trials < 1) {
        throw std::invalid_argument("run_demo: fusion_count and trials must be >= 1");
    }

    // Demo fit protocol: longer schedule with finer steps than the block
    // defaults, since the 1D scenarios chase parameter recovery rather than
    // block reconstruction.
    FitConfig fit_cfg;
    fit_cfg.num_kernels = cfg.ground_truth.num_kernels();
    fit_cfg.max_iters = 1000;
    fit_cfg.step_size = 0.03;

    constexpr int kEvalPoints = 1000;

    Demo1DResult result;
    for (std::size_t s = 0; s < cfg.sample_counts.size(); ++s) {
        Demo1DScenario scen;
        scen.sample_count = cfg.sample_counts[s];
        scen.noise_var = cfg.noise_vars[s];
        scen.truth = cfg.ground_truth;

        scen.fits.resize(static_cast<std::size_t>(cfg.trials));
        scen.fused.resize(static_cast<std::size_t>(cfg.trials));
        for (int trial = 0; trial < cfg.trials; ++trial) {
            std::vector<SMoEModel>& group = scen.fits[trial];
            group.reserve(static_cast<std::size_t>(cfg.fusion_count));
            for (int h = 0; h < cfg.fusion_count; ++h) {
                const std::uint64_t seed = derive_seed(cfg.seed, s, trial, h);
                const BlockData block =
                    sample_1d(cfg.ground_truth, scen.sample_count, scen.noise_var, seed);
                group.push_back(fit_block(block, fit_cfg).first);
                if (trial == 0 && h == 0) {
                    scen.sample_x.reserve(block.coords.size());
                    for (const Vec2& x : block.coords) scen.sample_x.push_back(x[0]);
                    scen.sample_y = block.values;
                }
            }
            scen.fused[trial] = average_parameters(group);
        }

        scen.eval_points.resize(kEvalPoints);
        scen.y_true.resize(kEvalPoints);
        scen.y_single.resize(kEvalPoints);
        scen.y_fused.resize(kEvalPoints);
        const int L = cfg.ground_truth.num_kernels();
        scen.gates_true.assign(L, std::vector<double>(kEvalPoints));
        scen.gates_fused.assign(L, std::vector<double>(kEvalPoints));
        const SMoEModel& single = scen.fits[0][0];
        const SMoEModel& fused = scen.fused[0];
        std::vector<double> w;
        for (int i = 0; i < kEvalPoints; ++i) {
            const Vec2 x{pixel_center_coord(i, kEvalPoints), 0.0};
            scen.eval_points[i] = x[0];
            scen.y_true[i] = predict(x, cfg.ground_truth);
            scen.y_single[i] = predict(x, single);
            scen.y_fused[i] = predict(x, fused);
            gating_weights(x, cfg.ground_truth, w);
            for (int j = 0; j < L; ++j) scen.gates_true[j][i] = w[j];
            gating_weights(x, fused, w);
            for (int j = 0; j < L; ++j) scen.gates_fused[j][i] = w[j];
        }
        result.scenarios.push_back(std::move(scen));
    }
    return result;
}

namespace {

std::string scenario_tag(const Demo1DScenario& scen) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "M%d_var%g", scen.sample_count, scen.noise_var);
    return buf;
}

void write_params_row(std::ofstream& out, const std::string& source, int trial,
                      const SMoEModel& truth, const SMoEModel& model) {
    const std::vector<int> idx = match_kernels(truth, model);
    for (int j = 0; j < truth.num_kernels(); ++j) {
        const KernelParams& k = model.kernels[idx[j]];
        out << source << '\t' << trial << '\t' << j << '\t' << k.center[0] << '\t'
            << k.expert << '\n';
    }
}

}  // namespace

void write_demo_outputs(const Demo1DResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const Demo1DScenario& scen : result.scenarios) {
        const std::string tag = scenario_tag(scen);
        const int L = scen.truth.num_kernels();

        {
            std::ofstream out(out_dir / ("curves_" + tag + ".tsv"));
            out.precision(12);
            out << "x\ty_true\ty_single\ty_fused";
            for (int j = 0; j < L; ++j) out << "\tgate_true_" << j;
            for (int j = 0; j < L; ++j) out << "\tgate_fused_" << j;
            out << '\n';
            for (std::size_t i = 0; i < scen.eval_points.size(); ++i) {
                out << scen.eval_points[i] << '\t' << scen.y_true[i] << '\t'
                    << scen.y_single[i] << '\t' << scen.y_fused[i];
                for (int j = 0; j < L; ++j) out << '\t' << scen.gates_true[j][i];
                for (int j = 0; j < L; ++j) out << '\t' << scen.gates_fused[j][i];
                out << '\n';
            }
        }
        {
            std::ofstream out(out_dir / ("samples_" + tag + ".tsv"));
            out.precision(12);
            out << "x\ty_noisy\n";
            for (std::size_t i = 0; i < scen.sample_x.size(); ++i) {
                out << scen.sample_x[i] << '\t' << scen.sample_y[i] << '\n';
            }
        }
        {
            std::ofstream out(out_dir / ("params_" + tag + ".tsv"));
            out.precision(12);
            out << "source\ttrial\tkernel\tcenter\texpert\n";
            write_params_row(out, "true", -1, scen.truth, scen.truth);
            for (std::size_t trial = 0; trial < scen.fits.size(); ++trial) {
                for (const SMoEModel& fit : scen.fits[trial]) {
                    write_params_row(out, "fit", static_cast<int>(trial), scen.truth, fit);
                }
                write_params_row(out, "fused", static_cast<int>(trial), scen.truth,
                                 scen.fused[trial]);
            }
        }
    }
}

}  // namespace smoe
