#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "smoe/bench.hpp"
#include "smoe/cli.hpp"
#include "smoe/pgm_io.hpp"
#include "smoe/rng.hpp"
#include "smoe/scene.hpp"

using namespace smoe;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const char* tag) {
    const fs::path dir = fs::temp_directory_path() / (std::string("smoe_cli_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

GrayImage random_image(Rng& rng, int w, int h) {
    GrayImage img(w, h);
    for (double& v : img.pixels) v = rng.uniform(0.0, 1.0);
    return img;
}

struct CaptureStdout {
    std::stringstream buffer;
    std::streambuf* old;
    CaptureStdout() : old(std::cout.rdbuf(buffer.rdbuf())) {}
    ~CaptureStdout() { std::cout.rdbuf(old); }
    std::string str() const { return buffer.str(); }
};

struct CaptureStderr {
    std::stringstream buffer;
    std::streambuf* old;
    CaptureStderr() : old(std::cerr.rdbuf(buffer.rdbuf())) {}
    ~CaptureStderr() { std::cerr.rdbuf(old); }
    std::string str() const { return buffer.str(); }
};

}  // namespace

TEST_CASE("load_image maps bytes to unit intensities") {
    const auto dir = temp_dir("load");
    const auto path = dir / "two.pgm";
    write_bytes(path, std::string("P5\n2 2\n255\n") + '\x00' + '\xff' + '\x80' + '\x40');
    const GrayImage img = load_image(path);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.pixels[0] == 0.0);
    CHECK(img.pixels[1] == 1.0);
    CHECK(img.pixels[2] == 128.0 / 255.0);
    CHECK(img.pixels[3] == 64.0 / 255.0);
    fs::remove_all(dir);
}

TEST_CASE("load_image accepts header comments") {
    const auto dir = temp_dir("comment");
    const auto path = dir / "c.pgm";
    write_bytes(path, std::string("P5\n# a comment\n2 1\n# another\n255\n") + '\x10' + '\x20');
    const GrayImage img = load_image(path);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    fs::remove_all(dir);
}

TEST_CASE("load_image names the offending field") {
    const auto dir = temp_dir("errors");

    const auto magic = dir / "magic.pgm";
    write_bytes(magic, "P2\n2 2\n255\n....");
    CHECK_THROWS_WITH_AS(load_image(magic), doctest::Contains("magic"), IoError);

    const auto maxval = dir / "maxval.pgm";
    write_bytes(maxval, std::string("P5\n2 2\n65535\n") + std::string(8, '\x00'));
    CHECK_THROWS_WITH_AS(load_image(maxval), doctest::Contains("maxval"), IoError);

    const auto truncated = dir / "short.pgm";
    write_bytes(truncated, std::string("P5\n4 4\n255\n") + std::string(7, '\x00'));
    CHECK_THROWS_WITH_AS(load_image(truncated), doctest::Contains("truncated"), IoError);

    const auto missing = dir / "nothing.pgm";
    CHECK_THROWS_AS(load_image(missing), IoError);

    const auto badwidth = dir / "badwidth.pgm";
    write_bytes(badwidth, "P5\nxx 2\n255\n....");
    CHECK_THROWS_WITH_AS(load_image(badwidth), doctest::Contains("width"), IoError);

    fs::remove_all(dir);
}

TEST_CASE("save_image writes the exact documented layout") {
    const auto dir = temp_dir("save");
    const auto path = dir / "one.pgm";
    save_image(GrayImage(1, 1, 0.0), path);
    const std::string bytes = read_bytes(path);
    CHECK(bytes == std::string("P5\n1 1\n255\n") + '\x00');
    CHECK(bytes.size() == 12);

    // round-half-up quantization
    save_image(GrayImage(1, 1, 0.5), path);
    CHECK(static_cast<unsigned char>(read_bytes(path).back()) == 128);
    save_image(GrayImage(1, 1, 1.0), path);
    CHECK(static_cast<unsigned char>(read_bytes(path).back()) == 255);
    save_image(GrayImage(1, 1, -3.0), path);
    CHECK(static_cast<unsigned char>(read_bytes(path).back()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("save then load stays within half a quantization step") {
    const auto dir = temp_dir("rt");
    Rng rng(91);
    const GrayImage img = random_image(rng, 17, 9);
    const auto path = dir / "rt.pgm";
    save_image(img, path);
    const GrayImage back = load_image(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 1.0 / 510.0);
    }
    fs::remove_all(dir);
}

TEST_CASE("save-load-save is bit-stable") {
    const auto dir = temp_dir("fixed");
    Rng rng(92);
    for (int trial = 0; trial < 20; ++trial) {
        const GrayImage img = random_image(rng, rng.uniform_int(1, 32), rng.uniform_int(1, 32));
        const auto first = dir / "a.pgm";
        const auto second = dir / "b.pgm";
        save_image(img, first);
        save_image(load_image(first), second);
        CHECK(read_bytes(first) == read_bytes(second));
    }
    fs::remove_all(dir);
}

TEST_CASE("bench config parses the documented key=value schema") {
    const auto dir = temp_dir("benchcfg");
    const auto cfg_path = dir / "job.cfg";
    write_bytes(cfg_path,
                "# benchmark job\n"
                "in=clean.pgm\n"
                "noise=gaussian:0.01\n"
                "noise=speckle:0.02:77\n"
                "mode=s-smoe\n"
                "stride=1\n"
                "stride=2\n"
                "stride=8\n"
                "mode=bm-smoe\n"
                "kernels=4\n"
                "iters=50\n"
                "seed=9\n"
                "threads=2\n");
    const BenchmarkJob job = parse_bench_config(cfg_path);
    CHECK(job.clean_image == "clean.pgm");
    CHECK(job.seed == 9);
    REQUIRE(job.noise.size() == 2);
    CHECK(job.noise[0].kind == NoiseKind::gaussian);
    CHECK(job.noise[0].variance == 0.01);
    CHECK(job.noise[1].kind == NoiseKind::speckle);
    CHECK(job.noise[1].seed == 77);
    REQUIRE(job.pipelines.size() == 4);  // 3 strides + 1 bm
    CHECK(job.pipelines[0].stride == 1);
    CHECK(job.pipelines[2].stride == 8);
    CHECK(job.pipelines[3].mode == PipelineMode::bm_smoe);
    CHECK(job.pipelines[0].fit.max_iters == 50);
    CHECK(job.emit_images);
    CHECK(job.emit_metrics);
    fs::remove_all(dir);
}

TEST_CASE("bench config rejects malformed jobs") {
    const auto dir = temp_dir("benchbad");
    const auto path = dir / "bad.cfg";
    write_bytes(path, "noise=gaussian:0.01\nmode=s-smoe\n");
    CHECK_THROWS_WITH_AS(parse_bench_config(path), doctest::Contains("in"), IoError);
    write_bytes(path, "in=x.pgm\nmode=s-smoe\n");
    CHECK_THROWS_WITH_AS(parse_bench_config(path), doctest::Contains("noise"), IoError);
    write_bytes(path, "in=x.pgm\nnoise=poisson:0.1\nmode=s-smoe\n");
    CHECK_THROWS_AS(parse_bench_config(path), IoError);
    write_bytes(path, "in=x.pgm\nnoise=gaussian:0.1\nmode=s-smoe\nnot a pair\n");
    CHECK_THROWS_AS(parse_bench_config(path), IoError);
    fs::remove_all(dir);
}

TEST_CASE("run_bench emits the cartesian metrics table and images") {
    const auto dir = temp_dir("benchrun");
    save_image(synthetic_scene(24), dir / "scene.pgm");
    BenchmarkJob job;
    job.clean_image = dir / "scene.pgm";
    job.noise = {{NoiseKind::gaussian, 0.01, 0}, {NoiseKind::speckle, 0.01, 0}};
    for (int stride : {4, 6, 8}) {
        PipelineConfig cfg;
        cfg.stride = stride;
        cfg.fit.max_iters = 40;
        cfg.threads = 2;
        job.pipelines.push_back(cfg);
    }
    job.out_dir = dir / "out";
    const std::vector<MetricsRow> rows = run_bench(job);
    REQUIRE(rows.size() == 6);  // 2 noise specs x 3 pipelines

    const std::string table = metrics_table(rows);
    CHECK(table.rfind("image\tmethod\tH\tnoise\tvar\tpsnr_db\tssim\n", 0) == 0);
    CHECK(rows[0].image == "scene");
    CHECK(rows[0].method == "s-smoe");
    CHECK(rows[0].h_desc == "4");   // (8/4)^2
    CHECK(rows[2].h_desc == "1");   // (8/8)^2
    CHECK(rows[1].h_desc == "s6");  // stride does not divide the block

    CHECK(fs::exists(dir / "out" / "metrics.tsv"));
    CHECK(fs::exists(dir / "out" / "scene_gaussian0.01_noisy.pgm"));
    CHECK(fs::exists(dir / "out" / "scene_gaussian0.01_s-smoe_4.pgm"));
    CHECK(fs::exists(dir / "out" / "scene_speckle0.01_s-smoe_1.pgm"));

    // the written table matches the returned rows byte for byte
    CHECK(read_bytes(dir / "out" / "metrics.tsv") == table);
    fs::remove_all(dir);
}

TEST_CASE("run_cli usage and help behavior") {
    CaptureStdout out;
    CaptureStderr err;
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"denoise"}) == 1);  // missing required flags
    CHECK(run_cli({"denoise", "--in", "x.pgm", "--out", "y.pgm", "--mode", "bogus"}) == 1);
}

TEST_CASE("run_cli reports I/O failures with exit code 2") {
    CaptureStdout out;
    CaptureStderr err;
    CHECK(run_cli({"denoise", "--in", "/nonexistent/x.pgm", "--out", "/tmp/y.pgm"}) == 2);
    CHECK(err.str().find("error:") != std::string::npos);
}

TEST_CASE("denoise subcommand prints the psnr sentinel on a clean constant image") {
    const auto dir = temp_dir("denoise");
    save_image(GrayImage(32, 32, 0.5), dir / "flat.pgm");
    CaptureStdout out;
    const int code = run_cli({"denoise", "--in", (dir / "flat.pgm").string(), "--out",
                              (dir / "flat_out.pgm").string(), "--stride", "8", "--threads",
                              "2"});
    CHECK(code == 0);
    CHECK(out.str().find("psnr_vs_input_db=inf") != std::string::npos);
    CHECK(fs::exists(dir / "flat_out.pgm"));
    fs::remove_all(dir);
}

TEST_CASE("denoise subcommand is deterministic across runs and thread counts") {
    const auto dir = temp_dir("determinism");
    const GrayImage clean = synthetic_scene(24);
    save_image(add_gaussian(clean, {NoiseKind::gaussian, 0.01, 5}), dir / "noisy.pgm");
    CaptureStdout out;
    for (const char* threads : {"1", "3"}) {
        const int code =
            run_cli({"denoise", "--in", (dir / "noisy.pgm").string(), "--out",
                     (dir / (std::string("out_") + threads + ".pgm")).string(), "--stride",
                     "4", "--iters", "60", "--seed", "3", "--threads", threads});
        CHECK(code == 0);
    }
    CHECK(read_bytes(dir / "out_1.pgm") == read_bytes(dir / "out_3.pgm"));
    fs::remove_all(dir);
}

TEST_CASE("SMOE_SEED provides the default seed and the flag wins") {
    const auto dir = temp_dir("envseed");
    const GrayImage clean = synthetic_scene(24);
    save_image(add_gaussian(clean, {NoiseKind::gaussian, 0.02, 6}), dir / "noisy.pgm");
    CaptureStdout out;

    setenv("SMOE_SEED", "11", 1);
    CHECK(run_cli({"fitblock", "--in", (dir / "noisy.pgm").string(), "--iters", "40", "--out",
                   (dir / "env.txt").string()}) == 0);
    CHECK(run_cli({"fitblock", "--in", (dir / "noisy.pgm").string(), "--iters", "40", "--seed",
                   "11", "--out", (dir / "flag.txt").string()}) == 0);
    unsetenv("SMOE_SEED");

    CHECK(read_bytes(dir / "env.txt") == read_bytes(dir / "flag.txt"));

    setenv("SMOE_SEED", "not-a-seed", 1);
    CaptureStderr err;
    CHECK(run_cli({"fitblock", "--in", (dir / "noisy.pgm").string(), "--iters", "40"}) == 1);
    unsetenv("SMOE_SEED");
    fs::remove_all(dir);
}

TEST_CASE("fitblock subcommand dumps a readable model") {
    const auto dir = temp_dir("fitblock");
    save_image(synthetic_scene(24), dir / "scene.pgm");
    CaptureStdout out;
    const int code = run_cli({"fitblock", "--in", (dir / "scene.pgm").string(), "--row", "4",
                              "--col", "4", "--kernels", "2", "--iters", "40"});
    CHECK(code == 0);
    const std::string text = out.str();
    CHECK(text.find("smoe-model") != std::string::npos);
    CHECK(text.find("kernel 0") != std::string::npos);
    CHECK(text.find("kernel 1") != std::string::npos);
    CHECK(text.find("final_loss") != std::string::npos);

    CaptureStderr err;
    CHECK(run_cli({"fitblock", "--in", (dir / "scene.pgm").string(), "--row", "20", "--col",
                   "20"}) == 1);
    fs::remove_all(dir);
}

TEST_CASE("demo1d subcommand writes the documented files") {
    const auto dir = temp_dir("demo1d");
    CaptureStdout out;
    const int code = run_cli({"demo1d", "--out-dir", (dir / "demo").string(), "--seed", "3",
                              "--fusion-count", "2"});
    CHECK(code == 0);
    CHECK(fs::exists(dir / "demo" / "curves_M3000_var0.15.tsv"));
    CHECK(fs::exists(dir / "demo" / "samples_M32_var0.05.tsv"));
    CHECK(fs::exists(dir / "demo" / "params_M32_var0.05.tsv"));
    fs::remove_all(dir);
}

TEST_CASE("bench subcommand runs a job end to end, deterministically") {
    const auto dir = temp_dir("benchcli");
    save_image(synthetic_scene(24), dir / "scene.pgm");
    const auto cfg_path = dir / "job.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "in=" << (dir / "scene.pgm").string() << "\n"
            << "noise=gaussian:0.01\n"
            << "mode=s-smoe\n"
            << "stride=8\n"
            << "iters=40\n"
            << "threads=2\n"
            << "seed=4\n";
    }
    for (const char* run : {"a", "b"}) {
        CaptureStdout out;
        const int code = run_cli({"bench", "--config", cfg_path.string(), "--out-dir",
                                  (dir / run).string()});
        CHECK(code == 0);
        CHECK(out.str().rfind("image\tmethod\tH\tnoise\tvar\tpsnr_db\tssim\n", 0) == 0);
    }
    CHECK(read_bytes(dir / "a" / "metrics.tsv") == read_bytes(dir / "b" / "metrics.tsv"));
    CHECK(read_bytes(dir / "a" / "scene_gaussian0.01_s-smoe_1.pgm") ==
          read_bytes(dir / "b" / "scene_gaussian0.01_s-smoe_1.pgm"));
    fs::remove_all(dir);
}
