#include "smoe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "smoe/fusion.hpp"

namespace smoe {

namespace {

void validate(const GrayImage& img, const PipelineConfig& cfg) {
    if (cfg.block_size < 1) throw std::invalid_argument("pipeline: block_size must be >= 1");
    if (cfg.stride < 1 || cfg.stride > cfg.block_size) {
        throw std::invalid_argument("pipeline: stride must be in [1, block_size]");
    }
    if (cfg.block_size > std::min(img.width, img.height)) {
        throw std::invalid_argument("pipeline: block_size exceeds image dimensions");
    }
    if (cfg.weighting == WeightingMode::reliability && cfg.noise_var < 0.0) {
        throw std::invalid_argument("pipeline: reliability weighting needs noise_var >= 0");
    }
    if (cfg.bm.max_group < 1) throw std::invalid_argument("pipeline: max_group must be >= 1");
    if (cfg.bm.search_radius < 0) throw std::invalid_argument("pipeline: negative search_radius");
}

std::vector<int> axis_positions(int extent, int block_size, int stride) {
    std::vector<int> pos;
    const int last = extent - block_size;
    for (int p = 0; p <= last; p += stride) pos.push_back(p);
    if (pos.back() != last) pos.push_back(last);  // edge flush
    return pos;
}

// Fits one block and returns its prediction plus accumulation weight.
struct DenoisedBlock {
    std::vector<double> prediction;
    double weight = 1.0;
};

DenoisedBlock fit_and_predict(const GrayImage& img, int origin_row, int origin_col,
                              const PipelineConfig& cfg) {
    const BlockData block = block_at(img, origin_row, origin_col, cfg.block_size);
    const SMoEModel model = fit_block(block, cfg.fit).first;
    DenoisedBlock out;
    out.prediction = predict_block(model, cfg.block_size);
    if (cfg.weighting == WeightingMode::reliability) {
        out.weight = model_reliability(model, block, cfg.noise_var);
    }
    return out;
}

}  // namespace

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    if (static_cast<std::size_t>(t) > count) t = static_cast<int>(count);
    if (t <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (std::thread& th : pool) th.join();
}

void PixelAccumulator::add_block(int origin_row, int origin_col, int size,
                                 const std::vector<double>& values, double w) {
    for (int r = 0; r < size; ++r) {
        const std::size_t row_base = static_cast<std::size_t>(origin_row + r) * width;
        const std::size_t block_base = static_cast<std::size_t>(r) * size;
        for (int c = 0; c < size; ++c) {
            const std::size_t p = row_base + origin_col + c;
            sum[p] += w * values[block_base + c];
            weight[p] += w;
        }
    }
}

GrayImage PixelAccumulator::finalize() const {
    GrayImage out(width, height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (weight[i] <= 0.0) {
            throw std::logic_error("PixelAccumulator: uncovered pixel");
        }
        out.pixels[i] = clamp01(sum[i] / weight[i]);
    }
    return out;
}

std::vector<std::pair<int, int>> block_origins(int width, int height, int block_size,
                                               int stride) {
    const std::vector<int> rows = axis_positions(height, block_size, stride);
    const std::vector<int> cols = axis_positions(width, block_size, stride);
    std::vector<std::pair<int, int>> origins;
    origins.reserve(rows.size() * cols.size());
    for (int r : rows) {
        for (int c : cols) origins.emplace_back(r, c);
    }
    return origins;
}

BlockData block_at(const GrayImage& img, int origin_row, int origin_col, int block_size) {
    BlockData block;
    block.dim = 2;
    block.size = block_size;
    block.origin_row = origin_row;
    block.origin_col = origin_col;
    block.coords.reserve(static_cast<std::size_t>(block_size) * block_size);
    block.values.reserve(static_cast<std::size_t>(block_size) * block_size);
    for (int r = 0; r < block_size; ++r) {
        const double xr = pixel_center_coord(r, block_size);
        for (int c = 0; c < block_size; ++c) {
            block.coords.push_back({xr, pixel_center_coord(c, block_size)});
            block.values.push_back(img.at(origin_row + r, origin_col + c));
        }
    }
    return block;
}

std::vector<BlockData> extract_blocks(const GrayImage& img, int block_size, int stride) {
    if (block_size > std::min(img.width, img.height)) {
        throw std::invalid_argument("extract_blocks: block_size exceeds image dimensions");
    }
    std::vector<BlockData> blocks;
    for (const auto& [r, c] : block_origins(img.width, img.height, block_size, stride)) {
        blocks.push_back(block_at(img, r, c, block_size));
    }
    return blocks;
}

std::vector<std::pair<int, int>> block_match(const GrayImage& img,
                                             std::pair<int, int> ref_origin,
                                             const BlockMatchConfig& cfg, int block_size) {
    const auto [rr, rc] = ref_origin;
    if (rr < 0 || rc < 0 || rr + block_size > img.height || rc + block_size > img.width) {
        throw std::invalid_argument("block_match: reference block out of bounds");
    }

    const int r_lo = std::max(0, rr - cfg.search_radius);
    const int r_hi = std::min(img.height - block_size, rr + cfg.search_radius);
    const int c_lo = std::max(0, rc - cfg.search_radius);
    const int c_hi = std::min(img.width - block_size, rc + cfg.search_radius);

    struct Candidate {
        double dist;
        int row, col;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(r_hi - r_lo + 1) * (c_hi - c_lo + 1));
    const double inv_m = 1.0 / (static_cast<double>(block_size) * block_size);
    for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
            if (r == rr && c == rc) continue;  // reference is prepended below
            double acc = 0.0;
            for (int br = 0; br < block_size; ++br) {
                const double* pa = &img.pixels[static_cast<std::size_t>(rr + br) * img.width + rc];
                const double* pb = &img.pixels[static_cast<std::size_t>(r + br) * img.width + c];
                for (int bc = 0; bc < block_size; ++bc) {
                    const double d = pa[bc] - pb[bc];
                    acc += d * d;
                }
            }
            candidates.push_back({acc * inv_m, r, c});
        }
    }
    // stable sort on distance keeps scan order among ties
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });

    std::vector<std::pair<int, int>> group;
    group.reserve(static_cast<std::size_t>(cfg.max_group));
    group.emplace_back(rr, rc);
    for (const Candidate& cand : candidates) {
        if (static_cast<int>(group.size()) >= cfg.max_group) break;
        group.emplace_back(cand.row, cand.col);
    }
    return group;
}

GrayImage s_smoe_denoise(const GrayImage& img, const PipelineConfig& cfg) {
    validate(img, cfg);
    const auto origins = block_origins(img.width, img.height, cfg.block_size, cfg.stride);

    std::vector<DenoisedBlock> results(origins.size());
    parallel_for(origins.size(), cfg.threads, [&](std::size_t i) {
        results[i] = fit_and_predict(img, origins[i].first, origins[i].second, cfg);
    });

    // ordered accumulation keeps the output independent of thread scheduling
    PixelAccumulator acc(img.width, img.height);
    for (std::size_t i = 0; i < origins.size(); ++i) {
        acc.add_block(origins[i].first, origins[i].second, cfg.block_size,
                      results[i].prediction, results[i].weight);
    }
    return acc.finalize();
}

GrayImage bm_smoe_denoise(const GrayImage& img, const PipelineConfig& cfg) {
    validate(img, cfg);
    const auto refs = block_origins(img.width, img.height, cfg.block_size, cfg.bm.ref_stride);

    std::vector<std::vector<std::pair<int, int>>> groups(refs.size());
    parallel_for(refs.size(), cfg.threads, [&](std::size_t i) {
        groups[i] = block_match(img, refs[i], cfg.bm, cfg.block_size);
    });

    // Fit each distinct origin once; fitting is deterministic, so reusing the
    // model for repeated group members cannot change the output.
    auto key = [&](int r, int c) {
        return static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(img.width) + c;
    };
    std::vector<std::pair<int, int>> unique_origins;
    std::unordered_map<std::uint64_t, std::size_t> index_of;
    for (const auto& group : groups) {
        for (const auto& [r, c] : group) {
            auto [it, inserted] = index_of.try_emplace(key(r, c), unique_origins.size());
            if (inserted) unique_origins.emplace_back(r, c);
        }
    }

    std::vector<DenoisedBlock> results(unique_origins.size());
    parallel_for(unique_origins.size(), cfg.threads, [&](std::size_t i) {
        results[i] = fit_and_predict(img, unique_origins[i].first, unique_origins[i].second, cfg);
    });

    PixelAccumulator acc(img.width, img.height);
    for (const auto& group : groups) {
        for (const auto& [r, c] : group) {
            const DenoisedBlock& block = results[index_of.at(key(r, c))];
            acc.add_block(r, c, cfg.block_size, block.prediction, block.weight);
        }
    }
    return acc.finalize();
}

GrayImage denoise(const GrayImage& img, const PipelineConfig& cfg) {
    return cfg.mode == PipelineMode::s_smoe ? s_smoe_denoise(img, cfg)
                                            : bm_smoe_denoise(img, cfg);
}

}  // namespace smoe
