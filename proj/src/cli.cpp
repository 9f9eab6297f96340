#include "smoe/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "smoe/bench.hpp"
#include "smoe/demo1d.hpp"
#include "smoe/metrics.hpp"
#include "smoe/pgm_io.hpp"
#include "smoe/pipeline.hpp"

namespace smoe {

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

// --seed wins over SMOE_SEED wins over the built-in default.
std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value) {
    if (seed_opt->count() > 0) return flag_value;
    if (const char* env = std::getenv("SMOE_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw CLI::ValidationError("SMOE_SEED", "not a valid 64-bit seed");
        }
    }
    return kDefaultSeed;
}

struct DenoiseArgs {
    std::string in_path, out_path;
    std::string mode = "s-smoe";
    int stride = 1;
    int kernels = 4;
    int block_size = 8;
    int iters = 400;
    double noise_var = 0.0;
    std::string weighting = "uniform";
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
    int ref_stride = 3;
    int search_radius = 19;
    int max_group = 16;
};

int do_denoise(const DenoiseArgs& args, const CLI::Option* seed_opt) {
    PipelineConfig cfg;
    cfg.mode = args.mode == "bm-smoe" ? PipelineMode::bm_smoe : PipelineMode::s_smoe;
    cfg.block_size = args.block_size;
    cfg.stride = args.stride;
    cfg.fit.num_kernels = args.kernels;
    cfg.fit.max_iters = args.iters;
    cfg.fit.seed = resolve_seed(seed_opt, args.seed);
    cfg.weighting =
        args.weighting == "reliability" ? WeightingMode::reliability : WeightingMode::uniform;
    cfg.noise_var = args.noise_var;
    cfg.threads = args.threads;
    cfg.bm.ref_stride = args.ref_stride;
    cfg.bm.search_radius = args.search_radius;
    cfg.bm.max_group = args.max_group;

    const GrayImage input = load_image(args.in_path);
    const GrayImage output = denoise(input, cfg);
    save_image(output, args.out_path);
    std::cout << "psnr_vs_input_db=" << psnr(output, input) << '\n';
    return 0;
}

struct BenchArgs {
    std::string config_path, out_dir;
};

int do_bench(const BenchArgs& args) {
    BenchmarkJob job = parse_bench_config(args.config_path);
    job.out_dir = args.out_dir;
    const std::vector<MetricsRow> rows = run_bench(job);
    std::cout << metrics_table(rows);
    return 0;
}

struct Demo1dArgs {
    std::string out_dir;
    std::uint64_t seed = kDefaultSeed;
    int trials = 1;
    int fusion_count = 10;
};

int do_demo1d(const Demo1dArgs& args, const CLI::Option* seed_opt) {
    Demo1DConfig cfg;
    cfg.ground_truth = demo_ground_truth();
    cfg.trials = args.trials;
    cfg.fusion_count = args.fusion_count;
    cfg.seed = resolve_seed(seed_opt, args.seed);
    const Demo1DResult result = run_demo(cfg);
    write_demo_outputs(result, args.out_dir);
    std::cout << "wrote " << result.scenarios.size() * 3 << " files to " << args.out_dir << '\n';
    return 0;
}

struct FitblockArgs {
    std::string in_path, out_path;
    int row = 0, col = 0;
    int block_size = 8;
    int kernels = 4;
    int iters = 400;
    std::uint64_t seed = kDefaultSeed;
};

int do_fitblock(const FitblockArgs& args, const CLI::Option* seed_opt) {
    const GrayImage img = load_image(args.in_path);
    if (args.row < 0 || args.col < 0 || args.row + args.block_size > img.height ||
        args.col + args.block_size > img.width) {
        throw CLI::ValidationError("--row/--col", "block does not fit inside the image");
    }
    const BlockData block = block_at(img, args.row, args.col, args.block_size);
    FitConfig fit_cfg;
    fit_cfg.num_kernels = args.kernels;
    fit_cfg.max_iters = args.iters;
    fit_cfg.seed = resolve_seed(seed_opt, args.seed);
    const auto [model, report] = fit_block(block, fit_cfg);

    std::string text = model_to_text(model);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "final_loss %.17g\niters_used %d\ngrad_norm %.17g\n",
                  report.final_loss, report.iters_used, report.grad_norm);
    text += buf;
    if (args.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(args.out_path);
        if (!out) throw IoError("fitblock: cannot write " + args.out_path);
        out << text;
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Block-based SMoE image denoising with multi-model inference"};
    app.require_subcommand(1);

    DenoiseArgs dn;
    CLI::App* denoise_cmd = app.add_subcommand("denoise", "Denoise a PGM image");
    denoise_cmd->add_option("--in", dn.in_path, "input image (binary PGM, P5)")->required();
    denoise_cmd->add_option("--out", dn.out_path, "output image path")->required();
    denoise_cmd->add_option("--mode", dn.mode, "pipeline")
        ->check(CLI::IsMember({"s-smoe", "bm-smoe"}))
        ->capture_default_str();
    denoise_cmd->add_option("--stride", dn.stride, "block window shift (s-smoe)")
        ->capture_default_str();
    denoise_cmd->add_option("--kernels", dn.kernels, "kernels per block model")
        ->capture_default_str();
    denoise_cmd->add_option("--block-size", dn.block_size, "block edge length")
        ->capture_default_str();
    denoise_cmd->add_option("--iters", dn.iters, "gradient-descent iterations per block")
        ->capture_default_str();
    denoise_cmd->add_option("--noise-var", dn.noise_var, "noise variance (reliability weighting)")
        ->capture_default_str();
    denoise_cmd->add_option("--weighting", dn.weighting, "model averaging weights")
        ->check(CLI::IsMember({"uniform", "reliability"}))
        ->capture_default_str();
    const CLI::Option* dn_seed =
        denoise_cmd->add_option("--seed", dn.seed, "RNG seed (SMOE_SEED overrides default)")
            ->capture_default_str();
    denoise_cmd->add_option("--threads", dn.threads, "worker threads (0 = hardware)")
        ->capture_default_str();
    denoise_cmd->add_option("--ref-stride", dn.ref_stride, "reference-block step (bm-smoe)")
        ->capture_default_str();
    denoise_cmd->add_option("--search-radius", dn.search_radius, "block-match window (bm-smoe)")
        ->capture_default_str();
    denoise_cmd->add_option("--max-group", dn.max_group, "matched blocks per group (bm-smoe)")
        ->capture_default_str();

    BenchArgs bn;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark job from a config file");
    bench_cmd->add_option("--config", bn.config_path, "key=value job description")->required();
    bench_cmd->add_option("--out-dir", bn.out_dir, "output directory")->required();

    Demo1dArgs dm;
    CLI::App* demo_cmd = app.add_subcommand("demo1d", "1D small-sample fusion experiment");
    demo_cmd->add_option("--out-dir", dm.out_dir, "output directory")->required();
    const CLI::Option* dm_seed =
        demo_cmd->add_option("--seed", dm.seed, "RNG seed (SMOE_SEED overrides default)")
            ->capture_default_str();
    demo_cmd->add_option("--trials", dm.trials, "independent repetitions")->capture_default_str();
    demo_cmd->add_option("--fusion-count", dm.fusion_count, "models fused per estimate (H)")
        ->capture_default_str();

    FitblockArgs fb;
    CLI::App* fit_cmd = app.add_subcommand("fitblock", "Fit one block and dump the model");
    fit_cmd->add_option("--in", fb.in_path, "input image (binary PGM, P5)")->required();
    fit_cmd->add_option("--row", fb.row, "block origin row")->capture_default_str();
    fit_cmd->add_option("--col", fb.col, "block origin column")->capture_default_str();
    fit_cmd->add_option("--block-size", fb.block_size, "block edge length")->capture_default_str();
    fit_cmd->add_option("--kernels", fb.kernels, "kernels in the model")->capture_default_str();
    fit_cmd->add_option("--iters", fb.iters, "gradient-descent iterations")->capture_default_str();
    const CLI::Option* fb_seed =
        fit_cmd->add_option("--seed", fb.seed, "RNG seed (SMOE_SEED overrides default)")
            ->capture_default_str();
    fit_cmd->add_option("--out", fb.out_path, "dump file (default: stdout)");

    try {
        app.parse(argc, argv);
        if (denoise_cmd->parsed()) return do_denoise(dn, dn_seed);
        if (bench_cmd->parsed()) return do_bench(bn);
        if (demo_cmd->parsed()) return do_demo1d(dm, dm_seed);
        if (fit_cmd->parsed()) return do_fitblock(fb, fb_seed);
        return 1;
    } catch (const CLI::ParseError& e) {
        // prints help to stdout / errors to stderr and yields 0 for --help
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("smoe");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace smoe
