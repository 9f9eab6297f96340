#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "smoe/noise.hpp"
#include "smoe/pipeline.hpp"

namespace smoe {

// One line of the benchmark result table.
struct MetricsRow {
    std::string image;
    std::string method;
    std::string h_desc;  // fused models per pixel, or group descriptor
    std::string noise_kind;
    double noise_var = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

inline constexpr const char* kMetricsHeader = "image\tmethod\tH\tnoise\tvar\tpsnr_db\tssim";

struct BenchmarkJob {
    std::filesystem::path clean_image;
    std::vector<NoiseSpec> noise;
    std::vector<PipelineConfig> pipelines;
    std::filesystem::path out_dir;
    bool emit_images = true;
    bool emit_metrics = true;
    std::uint64_t seed = 1;
};

// Flat key=value config, keys matching the CLI flag names (schema in README).
BenchmarkJob parse_bench_config(const std::filesystem::path& file);

std::string h_descriptor(const PipelineConfig& cfg);

// Runs every noise spec x pipeline combination against the clean image,
// writing denoised images and the metrics table under job.out_dir.
std::vector<MetricsRow> run_bench(const BenchmarkJob& job);

std::string metrics_table(const std::vector<MetricsRow>& rows);

}  // namespace smoe
