#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "smoe/fitter.hpp"
#include "smoe/image.hpp"
#include "smoe/model.hpp"

namespace smoe {

enum class PipelineMode { s_smoe, bm_smoe };
enum class WeightingMode { uniform, reliability };

// Block-matching parameters (BM3D step-1 conventions). The block distance is
// fixed: mean squared pixel difference.
struct BlockMatchConfig {
    int ref_stride = 3;      // step between reference blocks
    int search_radius = 19;  // candidate origins within +/- radius of the reference
    int max_group = 16;
};

struct PipelineConfig {
    int block_size = 8;
    int stride = 1;  // overlapping models per interior pixel: (block_size/stride)^2
    FitConfig fit{};
    PipelineMode mode = PipelineMode::s_smoe;
    BlockMatchConfig bm{};
    WeightingMode weighting = WeightingMode::uniform;
    double noise_var = 0.0;  // consumed only by reliability weighting
    int threads = 0;         // 0 = hardware concurrency
};

// Per-pixel (sum, weight) pairs for fusing overlapping denoised blocks.
struct PixelAccumulator {
    int width = 0;
    int height = 0;
    std::vector<double> sum;
    std::vector<double> weight;

    PixelAccumulator(int w, int h)
        : width(w), height(h),
          sum(static_cast<std::size_t>(w) * h, 0.0),
          weight(static_cast<std::size_t>(w) * h, 0.0) {}

    void add_block(int origin_row, int origin_col, int size,
                   const std::vector<double>& values, double w);

    // sum/weight per pixel, clamped to [0,1]. Throws if any pixel was never
    // covered (impossible for valid block placements).
    GrayImage finalize() const;
};

// Block origins along the stride grid, edge-flushed so every pixel is
// covered, emitted in scan order.
std::vector<std::pair<int, int>> block_origins(int width, int height, int block_size,
                                               int stride);

BlockData block_at(const GrayImage& img, int origin_row, int origin_col, int block_size);

std::vector<BlockData> extract_blocks(const GrayImage& img, int block_size, int stride);

// Origins of the blocks most similar to the reference, ranked by ascending
// mean squared difference over an exhaustive scan of the search window.
// The reference always ranks first; ties break by scan order. At most
// cfg.max_group origins are returned.
std::vector<std::pair<int, int>> block_match(const GrayImage& img,
                                             std::pair<int, int> ref_origin,
                                             const BlockMatchConfig& cfg, int block_size);

// Sliding-window multi-model denoising: fit one model per (overlapping)
// block, predict it, and average all predictions covering each pixel.
GrayImage s_smoe_denoise(const GrayImage& img, const PipelineConfig& cfg);

// Non-local multi-model denoising: block-match groups around reference
// blocks, fit one model per group member, and aggregate every denoised
// member at its own origin.
GrayImage bm_smoe_denoise(const GrayImage& img, const PipelineConfig& cfg);

GrayImage denoise(const GrayImage& img, const PipelineConfig& cfg);

// Deterministic-output parallel loop: fn(i) must write only to slot i state.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace smoe
