#include "smoe/fusion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace smoe {

GatingMass gating_mass(const SMoEModel& model, const BlockData& block) {
    GatingMass out;
    out.mass.assign(static_cast<std::size_t>(model.num_kernels()), 0.0);
    std::vector<double> w;
    for (int m = 0; m < block.sample_count(); ++m) {
        gating_weights(block.coords[m], model, w);
        for (int j = 0; j < model.num_kernels(); ++j) out.mass[j] += w[j];
    }
    return out;
}

std::vector<int> match_kernels(const SMoEModel& anchor, const SMoEModel& other) {
    const int num = anchor.num_kernels();
    std::vector<int> matched(static_cast<std::size_t>(num), -1);
    std::vector<bool> used(static_cast<std::size_t>(num), false);
    for (int j = 0; j < num; ++j) {
        const Vec2& c = anchor.kernels[j].center;
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int l = 0; l < num; ++l) {
            if (used[l]) continue;
            const Vec2& o = other.kernels[l].center;
            const double dx0 = c[0] - o[0];
            const double dx1 = anchor.dim == 2 ? c[1] - o[1] : 0.0;
            const double d = dx0 * dx0 + dx1 * dx1;
            if (d < best_d) {
                best_d = d;
                best = l;
            }
        }
        matched[j] = best;
        used[best] = true;
    }
    return matched;
}

SMoEModel average_parameters(std::span<const SMoEModel> models) {
    if (models.empty()) throw std::invalid_argument("average_parameters: no models");
    const SMoEModel& anchor = models[0];
    for (const SMoEModel& m : models) {
        if (m.dim != anchor.dim || m.num_kernels() != anchor.num_kernels()) {
            throw std::invalid_argument("average_parameters: models must share L and dim");
        }
    }

    const std::size_t per = params_per_kernel(anchor.dim);
    std::vector<double> acc(per * anchor.kernels.size(), 0.0);
    for (const SMoEModel& m : models) {
        const std::vector<int> idx = match_kernels(anchor, m);
        SMoEModel reordered = m;
        for (int j = 0; j < anchor.num_kernels(); ++j) {
            reordered.kernels[j] = m.kernels[idx[j]];
        }
        const std::vector<double> theta = pack_params(reordered);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += theta[i];
    }
    const double inv_h = 1.0 / static_cast<double>(models.size());
    for (double& v : acc) v *= inv_h;
    return unpack_params(acc, anchor.dim, anchor.num_kernels());
}

std::vector<double> average_predictions(const std::vector<std::vector<double>>& predictions,
                                        const FusionWeights& w) {
    if (predictions.empty()) throw std::invalid_argument("average_predictions: no inputs");
    if (predictions.size() != w.weights.size()) {
        throw std::invalid_argument("average_predictions: weight count mismatch");
    }
    const std::size_t n = predictions[0].size();
    for (const auto& p : predictions) {
        if (p.size() != n) throw std::invalid_argument("average_predictions: shape mismatch");
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t h = 0; h < predictions.size(); ++h) {
        const double wh = w.weights[h];
        const std::vector<double>& p = predictions[h];
        for (std::size_t i = 0; i < n; ++i) out[i] += wh * p[i];
    }
    return out;
}

double model_reliability(const SMoEModel& model, const BlockData& block, double noise_var) {
    if (noise_var <= 0.0) return 1.0;
    const GatingMass gm = gating_mass(model, block);
    double mean_var = 0.0;
    for (double mj : gm.mass) {
        mean_var += noise_var / std::max(mj, 1e-12);
    }
    mean_var /= static_cast<double>(gm.mass.size());
    return 1.0 / mean_var;
}

FusionWeights reliability_weights(std::span<const SMoEModel> models,
                                  std::span<const BlockData> blocks,
                                  double noise_var) {
    if (models.size() != blocks.size()) {
        throw std::invalid_argument("reliability_weights: model/block count mismatch");
    }
    if (models.empty()) throw std::invalid_argument("reliability_weights: no models");
    if (noise_var < 0.0) throw std::invalid_argument("reliability_weights: negative noise_var");

    FusionWeights out;
    out.weights.assign(models.size(), 1.0);
    if (noise_var > 0.0) {
        for (std::size_t h = 0; h < models.size(); ++h) {
            out.weights[h] = model_reliability(models[h], blocks[h], noise_var);
        }
    }
    double sum = 0.0;
    for (double v : out.weights) sum += v;
    for (double& v : out.weights) v /= sum;
    return out;
}

}  // namespace smoe
