#include "smoe/bench.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "smoe/metrics.hpp"
#include "smoe/pgm_io.hpp"
#include "smoe/rng.hpp"

namespace smoe {

namespace {

struct RawConfig {
    std::map<std::string, std::vector<std::string>> entries;
    int line_of_error = 0;

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    std::string single(const std::string& key, const std::string& fallback) const {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        if (it->second.size() != 1) {
            throw IoError("bench config: key '" + key + "' given more than once");
        }
        return it->second.front();
    }
};

RawConfig read_key_values(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("bench config: cannot open " + file.string());
    RawConfig raw;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const std::size_t eq = line.find('=', start);
        if (eq == std::string::npos) {
            throw IoError("bench config: line " + std::to_string(lineno) +
                          " is not key=value in " + file.string());
        }
        std::string key = line.substr(start, eq - start);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        const std::size_t vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? std::string() : value.substr(vstart);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
        raw.entries[key].push_back(value);
    }
    return raw;
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        return std::stoi(value);
    } catch (const std::exception&) {
        throw IoError("bench config: invalid integer '" + value + "' for key '" + key + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw IoError("bench config: invalid number '" + value + "' for key '" + key + "'");
    }
}

NoiseSpec parse_noise(const std::string& value) {
    // <kind>:<variance>[:<seed>]
    NoiseSpec spec;
    const std::size_t p1 = value.find(':');
    if (p1 == std::string::npos) {
        throw IoError("bench config: noise entry '" + value + "' wants kind:variance[:seed]");
    }
    const std::string kind = value.substr(0, p1);
    if (kind == "gaussian") {
        spec.kind = NoiseKind::gaussian;
    } else if (kind == "speckle") {
        spec.kind = NoiseKind::speckle;
    } else {
        throw IoError("bench config: unknown noise kind '" + kind + "'");
    }
    const std::size_t p2 = value.find(':', p1 + 1);
    spec.variance = parse_double("noise", value.substr(p1 + 1, p2 - p1 - 1));
    if (spec.variance < 0.0) throw IoError("bench config: negative noise variance");
    spec.seed = p2 == std::string::npos
                    ? 0  // filled from the job seed at run time
                    : static_cast<std::uint64_t>(std::stoull(value.substr(p2 + 1)));
    return spec;
}

std::string format_var(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

std::string h_descriptor(const PipelineConfig& cfg) {
    if (cfg.mode == PipelineMode::bm_smoe) {
        return "g" + std::to_string(cfg.bm.max_group);
    }
    if (cfg.block_size % cfg.stride == 0) {
        const int per_axis = cfg.block_size / cfg.stride;
        return std::to_string(per_axis * per_axis);
    }
    return "s" + std::to_string(cfg.stride);
}

BenchmarkJob parse_bench_config(const std::filesystem::path& file) {
    const RawConfig raw = read_key_values(file);
    BenchmarkJob job;

    if (!raw.has("in")) throw IoError("bench config: missing required key 'in'");
    job.clean_image = raw.single("in", "");
    job.seed = static_cast<std::uint64_t>(std::stoull(raw.single("seed", "1")));

    if (!raw.has("noise")) throw IoError("bench config: need at least one 'noise' entry");
    for (const std::string& v : raw.entries.at("noise")) job.noise.push_back(parse_noise(v));

    const std::string emit = raw.single("emit", "images,metrics");
    job.emit_images = emit.find("images") != std::string::npos;
    job.emit_metrics = emit.find("metrics") != std::string::npos;
    if (!job.emit_images && !job.emit_metrics) {
        throw IoError("bench config: emit must include 'images' and/or 'metrics'");
    }

    PipelineConfig base;
    base.block_size = parse_int("block-size", raw.single("block-size", "8"));
    base.fit.num_kernels = parse_int("kernels", raw.single("kernels", "4"));
    base.fit.max_iters = parse_int("iters", raw.single("iters", "400"));
    base.fit.seed = job.seed;
    base.threads = parse_int("threads", raw.single("threads", "0"));
    base.bm.ref_stride = parse_int("ref-stride", raw.single("ref-stride", "3"));
    base.bm.search_radius = parse_int("search-radius", raw.single("search-radius", "19"));
    base.bm.max_group = parse_int("max-group", raw.single("max-group", "16"));
    const std::string weighting = raw.single("weighting", "uniform");
    if (weighting == "uniform") {
        base.weighting = WeightingMode::uniform;
    } else if (weighting == "reliability") {
        base.weighting = WeightingMode::reliability;
    } else {
        throw IoError("bench config: unknown weighting '" + weighting + "'");
    }

    std::vector<int> strides;
    if (raw.has("stride")) {
        for (const std::string& v : raw.entries.at("stride")) strides.push_back(parse_int("stride", v));
    } else {
        strides.push_back(1);
    }

    if (!raw.has("mode")) throw IoError("bench config: need at least one 'mode' entry");
    for (const std::string& mode : raw.entries.at("mode")) {
        if (mode == "s-smoe") {
            for (int s : strides) {
                PipelineConfig cfg = base;
                cfg.mode = PipelineMode::s_smoe;
                cfg.stride = s;
                job.pipelines.push_back(cfg);
            }
        } else if (mode == "bm-smoe") {
            PipelineConfig cfg = base;
            cfg.mode = PipelineMode::bm_smoe;
            job.pipelines.push_back(cfg);
        } else {
            throw IoError("bench config: unknown mode '" + mode + "'");
        }
    }
    return job;
}

std::string metrics_table(const std::vector<MetricsRow>& rows) {
    std::string out = kMetricsHeader;
    out += '\n';
    char buf[256];
    for (const MetricsRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%s\t%s\t%.4f\t%.6f\n", row.image.c_str(),
                      row.method.c_str(), row.h_desc.c_str(), row.noise_kind.c_str(),
                      format_var(row.noise_var).c_str(), row.psnr_db, row.ssim);
        out += buf;
    }
    return out;
}

std::vector<MetricsRow> run_bench(const BenchmarkJob& job) {
    if (job.noise.empty() || job.pipelines.empty()) {
        throw std::invalid_argument("run_bench: need at least one noise spec and one pipeline");
    }
    const GrayImage clean = load_image(job.clean_image);
    const std::string stem = job.clean_image.stem().string();
    std::filesystem::create_directories(job.out_dir);

    std::vector<MetricsRow> rows;
    for (std::size_t n = 0; n < job.noise.size(); ++n) {
        NoiseSpec spec = job.noise[n];
        if (spec.seed == 0) spec.seed = derive_seed(job.seed, 0xA05Eu, n);
        const GrayImage noisy = add_noise(clean, spec);
        const std::string noise_tag =
            std::string(noise_kind_name(spec.kind)) + format_var(spec.variance);
        if (job.emit_images) {
            save_image(noisy, job.out_dir / (stem + "_" + noise_tag + "_noisy.pgm"));
        }

        for (const PipelineConfig& pipeline : job.pipelines) {
            PipelineConfig cfg = pipeline;
            if (cfg.weighting == WeightingMode::reliability) cfg.noise_var = spec.variance;
            const GrayImage denoised = denoise(noisy, cfg);

            MetricsRow row;
            row.image = stem;
            row.method = cfg.mode == PipelineMode::s_smoe ? "s-smoe" : "bm-smoe";
            row.h_desc = h_descriptor(cfg);
            row.noise_kind = noise_kind_name(spec.kind);
            row.noise_var = spec.variance;
            row.psnr_db = psnr(denoised, clean);
            row.ssim = ssim(denoised, clean);
            rows.push_back(row);

            if (job.emit_images) {
                save_image(denoised, job.out_dir / (stem + "_" + noise_tag + "_" + row.method +
                                                    "_" + row.h_desc + ".pgm"));
            }
        }
    }

    if (job.emit_metrics) {
        std::ofstream out(job.out_dir / "metrics.tsv");
        out << metrics_table(rows);
    }
    return rows;
}

}  // namespace smoe
