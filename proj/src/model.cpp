#include "smoe/model.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace smoe {

namespace {

// Shifted kernel activations z_j = mix_logit_j - q_j(x) minus their maximum.
// Returns the sum of exponentials; `expz` receives exp(z_j - z_max).
// The largest term is exactly 1, so the normalizer is always >= 1.
double shifted_exp_activations(const Vec2& x, const SMoEModel& model,
                               std::vector<double>& expz) {
    const int num = model.num_kernels();
    expz.resize(static_cast<std::size_t>(num));
    double zmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < num; ++j) {
        const KernelParams& k = model.kernels[j];
        const PrecFactor r = materialize_factor(k);
        const Vec2 diff{x[0] - k.center[0], x[1] - k.center[1]};
        const double z = k.mix_logit - quad_form(r, diff, model.dim);
        expz[j] = z;
        zmax = std::max(zmax, z);
    }
    double sum = 0.0;
    for (int j = 0; j < num; ++j) {
        expz[j] = std::exp(expz[j] - zmax);
        sum += expz[j];
    }
    return sum;
}

}  // namespace

std::array<double, 4> precision_matrix(const KernelParams& k, int dim) {
    const PrecFactor r = materialize_factor(k);
    if (dim == 1) {
        return {r.d0 * r.d0, 0.0, 0.0, 0.0};
    }
    // R = [[d0, 0], [off, d1]], so R R^T = [[d0^2, d0*off], [d0*off, off^2 + d1^2]]
    return {r.d0 * r.d0, r.d0 * r.off, r.d0 * r.off, r.off * r.off + r.d1 * r.d1};
}

double eval_kernel(const Vec2& x, const KernelParams& k, int dim) {
    const PrecFactor r = materialize_factor(k);
    const Vec2 diff{x[0] - k.center[0], x[1] - k.center[1]};
    return std::exp(-quad_form(r, diff, dim));
}

std::vector<double> mixing_weights(const SMoEModel& model) {
    const int num = model.num_kernels();
    std::vector<double> w(static_cast<std::size_t>(num));
    double lmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < num; ++j) lmax = std::max(lmax, model.kernels[j].mix_logit);
    double sum = 0.0;
    for (int j = 0; j < num; ++j) {
        w[j] = std::exp(model.kernels[j].mix_logit - lmax);
        sum += w[j];
    }
    for (double& v : w) v /= sum;
    return w;
}

void gating_weights(const Vec2& x, const SMoEModel& model, std::vector<double>& out) {
    const double sum = shifted_exp_activations(x, model, out);
    for (double& v : out) v /= sum;
}

std::vector<double> gating_weights(const Vec2& x, const SMoEModel& model) {
    std::vector<double> out;
    gating_weights(x, model, out);
    return out;
}

double predict(const Vec2& x, const SMoEModel& model) {
    thread_local std::vector<double> expz;
    const double denom = shifted_exp_activations(x, model, expz);
    double numer = 0.0;
    for (int j = 0; j < model.num_kernels(); ++j) {
        numer += model.kernels[j].expert * expz[j];
    }
    return numer / denom;
}

std::vector<double> predict_block(const SMoEModel& model, int size) {
    if (model.dim == 1) {
        std::vector<double> out(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) {
            out[i] = predict({pixel_center_coord(i, size), 0.0}, model);
        }
        return out;
    }
    std::vector<double> out(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        const double xr = pixel_center_coord(r, size);
        for (int c = 0; c < size; ++c) {
            out[static_cast<std::size_t>(r) * size + c] =
                predict({xr, pixel_center_coord(c, size)}, model);
        }
    }
    return out;
}

std::size_t params_per_kernel(int dim) {
    return static_cast<std::size_t>(dim + dim * (dim + 1) / 2 + 2);
}

std::vector<double> pack_params(const SMoEModel& model) {
    const int dim = model.dim;
    const std::size_t per = params_per_kernel(dim);
    std::vector<double> theta(per * model.kernels.size());
    std::size_t i = 0;
    for (const KernelParams& k : model.kernels) {
        for (int d = 0; d < dim; ++d) theta[i++] = k.center[d];
        theta[i++] = k.prec_factor[0];
        if (dim == 2) {
            theta[i++] = k.prec_factor[1];
            theta[i++] = k.prec_factor[2];
        }
        theta[i++] = k.mix_logit;
        theta[i++] = k.expert;
    }
    return theta;
}

void unpack_params_into(const std::vector<double>& theta, SMoEModel& model) {
    const int dim = model.dim;
    std::size_t i = 0;
    for (KernelParams& k : model.kernels) {
        for (int d = 0; d < dim; ++d) k.center[d] = theta[i++];
        k.prec_factor[0] = theta[i++];
        if (dim == 2) {
            k.prec_factor[1] = theta[i++];
            k.prec_factor[2] = theta[i++];
        }
        k.mix_logit = theta[i++];
        k.expert = theta[i++];
    }
}

SMoEModel unpack_params(const std::vector<double>& theta, int dim, int num_kernels) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("unpack_params: dim must be 1 or 2");
    if (num_kernels < 1) throw std::invalid_argument("unpack_params: need at least one kernel");
    if (theta.size() != params_per_kernel(dim) * static_cast<std::size_t>(num_kernels)) {
        throw std::invalid_argument("unpack_params: theta size mismatch");
    }
    SMoEModel model;
    model.dim = dim;
    model.kernels.resize(static_cast<std::size_t>(num_kernels));
    unpack_params_into(theta, model);
    return model;
}

void clamp_precision_logs(SMoEModel& model) {
    for (KernelParams& k : model.kernels) {
        k.prec_factor[0] = std::clamp(k.prec_factor[0], kMinLogDiag, kMaxLogDiag);
        if (model.dim == 2) {
            k.prec_factor[2] = std::clamp(k.prec_factor[2], kMinLogDiag, kMaxLogDiag);
        }
    }
}

std::string model_to_text(const SMoEModel& model) {
    std::string out;
    char buf[256];
    auto emit = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof(buf), fmt, args...);
        out += buf;
    };
    emit("smoe-model\n");
    emit("dim %d\n", model.dim);
    emit("kernels %d\n", model.num_kernels());
    const std::vector<double> pi = mixing_weights(model);
    for (int j = 0; j < model.num_kernels(); ++j) {
        const KernelParams& k = model.kernels[j];
        const std::array<double, 4> p = precision_matrix(k, model.dim);
        emit("kernel %d\n", j);
        if (model.dim == 1) {
            emit("center %.17g\n", k.center[0]);
            emit("prec_factor_log_diag %.17g\n", k.prec_factor[0]);
            emit("precision %.17g\n", p[0]);
        } else {
            emit("center %.17g %.17g\n", k.center[0], k.center[1]);
            emit("prec_factor_log_diag %.17g %.17g\n", k.prec_factor[0], k.prec_factor[2]);
            emit("prec_factor_offdiag %.17g\n", k.prec_factor[1]);
            emit("precision %.17g %.17g %.17g %.17g\n", p[0], p[1], p[2], p[3]);
        }
        emit("mix_logit %.17g\n", k.mix_logit);
        emit("mix_weight %.17g\n", pi[j]);
        emit("expert %.17g\n", k.expert);
    }
    return out;
}

}  // namespace smoe
