#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dopinf/artifacts.hpp"
#include "dopinf/config.hpp"
#include "dopinf/errors.hpp"
#include "dopinf/opinf.hpp"
#include "dopinf/pipeline.hpp"
#include "dopinf/rom_search.hpp"
#include "dopinf/synth.hpp"
#include "helpers.hpp"

using namespace dopinf;
using dopinf::testing::scratch_dir;
namespace fs = std::filesystem;

namespace {

/// Small quadratic dataset on disk shared by the run() tests.
struct DiskDataset {
    fs::path dir;
    std::string data_path;

    DiskDataset() {
        dir = scratch_dir("pipeline");
        data_path = (dir / "quad.snp1").string();
        synth::QuadraticSpec spec;
        spec.n_vars = 2;
        spec.nx = 12;
        spec.r_true = 2;
        spec.nt = 20;
        spec.nt_p = 20;
        spec.seed = 101;
        synth::generate_quadratic(spec, data_path, data_path + ".truth");
    }
    ~DiskDataset() { fs::remove_all(dir); }
};

pipeline::PipelineConfig base_config(const DiskDataset& ds) {
    pipeline::PipelineConfig cfg;
    cfg.data_path = ds.data_path;
    cfg.b1 = {1e-8, 1e-2};
    cfg.b2 = {1e-6, 1e0};
    cfg.max_growth = 100.0;
    cfg.fixed_rank = 2;
    return cfg;
}

std::size_t count_lines(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

std::string slurp_text(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("load config applies defaults") {
    const auto cfg = pipeline::load_config(
        config::Config::parse_string("data = flow.snp1\n"));
    CHECK(cfg.data_path == "flow.snp1");
    CHECK(cfg.workers == 1);
    CHECK(cfg.kernels_backend == "auto");
    CHECK(cfg.energy == doctest::Approx(0.9995));
    CHECK(cfg.fixed_rank == 0);
    CHECK_FALSE(cfg.scaling);
    CHECK(cfg.b1 == rom_search::default_b1());
    CHECK(cfg.b2 == rom_search::default_b2());
    CHECK(cfg.max_growth == doctest::Approx(1.2));
    CHECK(cfg.nt_p == 0);
    CHECK(cfg.probes.empty());
    CHECK(cfg.write_field);
    CHECK(cfg.out_dir == ".");
}

TEST_CASE("load config reads explicit settings") {
    const auto cfg = pipeline::load_config(config::Config::parse_string(
        "data = d.snp1\n"
        "workers = 4\n"
        "backend = scalar\n"
        "rank = 5\n"
        "scaling = on\n"
        "b1 = 1e-3, 1e-2\n"
        "b2_min = 1e-2\n"
        "b2_max = 1e2\n"
        "b2_num = 5\n"
        "max_growth = 2.5\n"
        "nt_p = 40\n"
        "probes = 0:3, 1:7\n"
        "field = off\n"
        "out = results/run1\n"));
    CHECK(cfg.workers == 4);
    CHECK(cfg.kernels_backend == "scalar");
    CHECK(cfg.fixed_rank == 5);
    CHECK(cfg.scaling);
    CHECK(cfg.b1 == std::vector<double>{1e-3, 1e-2});
    CHECK(cfg.b2 == rom_search::logspace(1e-2, 1e2, 5));
    CHECK(cfg.max_growth == doctest::Approx(2.5));
    CHECK(cfg.nt_p == 40);
    REQUIRE(cfg.probes.size() == 2);
    CHECK(cfg.probes[0] == postprocess::Probe{0, 3});
    CHECK(cfg.probes[1] == postprocess::Probe{1, 7});
    CHECK_FALSE(cfg.write_field);
    CHECK(cfg.out_dir == "results/run1");
}

TEST_CASE("load config validates ranges") {
    auto load = [](const std::string& text) {
        return pipeline::load_config(config::Config::parse_string(text));
    };
    CHECK_THROWS_AS(load(""), ConfigError);
    CHECK_THROWS_AS(load("data = d\nworkers = 0\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nenergy = 0\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nenergy = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nrank = -1\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nb1 = \n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nb1 = 1e-3, x\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nb1 = -1e-3\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nb2_num = 0\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nb2_min = 0\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nmax_growth = 0\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nnt_p = -3\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nprobes = 0\n"), ConfigError);
    CHECK_THROWS_AS(load("data = d\nprobes = 0:-1\n"), ConfigError);
}

TEST_CASE("load config reports unknown keys as warnings") {
    std::vector<std::string> warnings;
    const auto cfg = pipeline::load_config(
        config::Config::parse_string("data = d\ntypo_key = 1\nworkers = 2\n"),
        &warnings);
    CHECK(cfg.workers == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("typo_key") != std::string::npos);
}

TEST_CASE("run results are invariant to the worker count") {
    DiskDataset ds;
    pipeline::RunResult reference;
    std::map<std::string, std::string> reference_result;
    for (int workers : {1, 2, 4}) {
        CAPTURE(workers);
        auto cfg = base_config(ds);
        cfg.workers = workers;
        cfg.out_dir = (ds.dir / ("run_p" + std::to_string(workers))).string();
        const auto result = pipeline::run(cfg);
        const auto result_file =
            artifacts::read_result(fs::path(cfg.out_dir) / "result.txt");

        CHECK(result.r == 2);
        CHECK(result.nt == 20);
        CHECK(result.nt_p == 20);
        CHECK(result.n_vars == 2);
        CHECK(result.nx == 12);
        CHECK(std::isfinite(result.train_err));
        if (workers == 1) {
            reference = result;
            reference_result = result_file;
        } else {
            CHECK(result.pair_opt == reference.pair_opt);
            CHECK(result.r == reference.r);
            CHECK(result.train_err ==
                  doctest::Approx(reference.train_err).epsilon(1e-12));
            CHECK(result_file.at("beta1") == reference_result.at("beta1"));
            CHECK(result_file.at("beta2") == reference_result.at("beta2"));
            CHECK(result_file.at("r") == reference_result.at("r"));
        }
    }
}

TEST_CASE("a run writes the full artifact set") {
    DiskDataset ds;
    auto cfg = base_config(ds);
    cfg.workers = 2;
    cfg.probes = {{0, 0}, {1, 11}};
    cfg.out_dir = (ds.dir / "artifacts").string();
    const auto result = pipeline::run(cfg);
    const fs::path out(cfg.out_dir);

    const std::size_t r = result.r;
    const std::size_t s = opinf::quad_len(r);
    const auto ops = artifacts::read_blobs(out / "operators.bin");
    REQUIRE(ops.count("A"));
    REQUIRE(ops.count("F"));
    REQUIRE(ops.count("c"));
    CHECK(ops.at("A").rows() == r);
    CHECK(ops.at("A").cols() == r);
    CHECK(ops.at("F").rows() == r);
    CHECK(ops.at("F").cols() == s);
    CHECK(ops.at("c").rows() == 1);
    CHECK(ops.at("c").cols() == r);

    const auto tr = artifacts::read_blobs(out / "reduced_map.bin");
    CHECK(tr.at("Tr").rows() == 20);
    CHECK(tr.at("Tr").cols() == r);
    const auto traj = artifacts::read_blobs(out / "trajectory.bin");
    CHECK(traj.at("Qtilde").rows() == 20);
    CHECK(traj.at("Qtilde").cols() == r);

    for (int rank : {0, 1}) {
        const auto blobs = artifacts::read_blobs(
            out / ("transform_rank" + std::to_string(rank) + ".bin"));
        REQUIRE(blobs.count("means"));
        REQUIRE(blobs.count("range"));
        CHECK(blobs.at("means").cols() == 2 * 6);  // n_vars * nx_i
        CHECK(blobs.at("range")(0, 1) - blobs.at("range")(0, 0) == 6.0);
    }

    // One probe per rank, both series written with nt_p entries.
    CHECK(artifacts::read_raw_vector(out / "probe_v0_g0.bin").size() == 20);
    CHECK(artifacts::read_raw_vector(out / "probe_v1_g11.bin").size() == 20);
    const std::string probes_text = slurp_text(out / "probes_manifest.txt");
    CHECK(probes_text.find("var=0 index=0 owner=0 file=probe_v0_g0.bin steps=20") !=
          std::string::npos);
    CHECK(probes_text.find("var=1 index=11 owner=1 file=probe_v1_g11.bin steps=20") !=
          std::string::npos);

    const std::string field_text = slurp_text(out / "field_manifest.txt");
    CHECK(field_text.find("rank=0 file=field_rank0.snp1 rows=0:6") !=
          std::string::npos);
    CHECK(field_text.find("rank=1 file=field_rank1.snp1 rows=6:12") !=
          std::string::npos);
    for (int rank : {0, 1}) {
        const auto header = data::read_header(
            (out / ("field_rank" + std::to_string(rank) + ".snp1")).string());
        CHECK(header.n_vars == 2);
        CHECK(header.nx == 6);
        CHECK(header.nt == 20);
    }

    // Header plus 2 ranks x 6 stages plus the winner line.
    CHECK(count_lines(out / "timings.csv") == 1 + 2 * 6 + 1);
    CHECK(fs::exists(out / "result.txt"));
    CHECK(fs::exists(out / "resolved.cfg"));
}

TEST_CASE("resolved config loads back to the same settings") {
    DiskDataset ds;
    auto cfg = base_config(ds);
    cfg.workers = 2;
    cfg.fixed_rank = 0;
    cfg.energy = 0.99;
    cfg.out_dir = (ds.dir / "resolved").string();
    pipeline::run(cfg);

    std::vector<std::string> warnings;
    const auto loaded = pipeline::load_config(
        config::Config::parse_file((fs::path(cfg.out_dir) / "resolved.cfg").string()),
        &warnings);
    CHECK(warnings.empty());
    CHECK(loaded.data_path == cfg.data_path);
    CHECK(loaded.workers == 2);
    CHECK(loaded.energy == cfg.energy);
    CHECK(loaded.fixed_rank == 0);
    CHECK(loaded.scaling == cfg.scaling);
    CHECK(loaded.b1 == cfg.b1);
    CHECK(loaded.b2 == cfg.b2);
    CHECK(loaded.max_growth == cfg.max_growth);
    CHECK(loaded.nt_p == 20);  // resolved from 0 to the actual horizon
    CHECK(loaded.write_field == cfg.write_field);
    CHECK(loaded.out_dir == cfg.out_dir);
}

TEST_CASE("fixed rank skips energy selection") {
    DiskDataset ds;
    auto cfg = base_config(ds);
    cfg.fixed_rank = 3;
    cfg.out_dir = (ds.dir / "fixedrank").string();
    const auto result = pipeline::run(cfg);
    CHECK(result.r == 3);
    CHECK_FALSE(result.rank_capped);
    const std::string resolved = slurp_text(fs::path(cfg.out_dir) / "resolved.cfg");
    CHECK(resolved.find("rank = 3") != std::string::npos);
    CHECK(resolved.find("energy") == std::string::npos);
}

TEST_CASE("energy selection picks the intrinsic dimension") {
    DiskDataset ds;
    auto cfg = base_config(ds);
    cfg.fixed_rank = 0;
    cfg.energy = 0.9999999;
    cfg.out_dir = (ds.dir / "energyrank").string();
    const auto result = pipeline::run(cfg);
    // The dataset is exactly two-dimensional after centering, so any
    // threshold below 1 lands on r = 2.
    CHECK(result.r == 2);
    CHECK_FALSE(result.rank_capped);
    CHECK(result.retained > 0.9999999);
}

TEST_CASE("energy threshold 1 caps at full rank and fails the whitening") {
    DiskDataset ds;
    auto cfg = base_config(ds);
    cfg.fixed_rank = 0;
    cfg.energy = 1.0;
    cfg.out_dir = (ds.dir / "capped").string();
    // Centering always leaves a zero eigenvalue, so the capped fallback
    // r = nt cannot be whitened.
    CHECK_THROWS_AS(pipeline::run(cfg), RankDeficiencyError);
}

TEST_CASE("runs reject bad inputs with config errors") {
    DiskDataset ds;
    auto cfg = base_config(ds);

    auto missing = cfg;
    missing.data_path = (ds.dir / "nope.snp1").string();
    missing.out_dir = (ds.dir / "x1").string();
    CHECK_THROWS_AS(pipeline::run(missing), DataFormatError);

    auto bad_probe = cfg;
    bad_probe.probes = {{0, 12}};
    bad_probe.out_dir = (ds.dir / "x2").string();
    CHECK_THROWS_AS(pipeline::run(bad_probe), ConfigError);

    auto short_horizon = cfg;
    short_horizon.nt_p = 10;
    short_horizon.out_dir = (ds.dir / "x3").string();
    CHECK_THROWS_AS(pipeline::run(short_horizon), ConfigError);

    auto big_rank = cfg;
    big_rank.fixed_rank = 21;
    big_rank.out_dir = (ds.dir / "x4").string();
    CHECK_THROWS_AS(pipeline::run(big_rank), ConfigError);

    auto bad_backend = cfg;
    bad_backend.kernels_backend = "bogus";
    bad_backend.out_dir = (ds.dir / "x5").string();
    CHECK_THROWS_AS(pipeline::run(bad_backend), ConfigError);
}

TEST_CASE("dry run prints the plan and writes nothing") {
    DiskDataset ds;
    auto cfg = base_config(ds);
    cfg.workers = 3;
    cfg.out_dir = (ds.dir / "dryout").string();
    std::ostringstream out;
    pipeline::dry_run(cfg, out);
    const std::string text = out.str();
    CHECK(text.find("workers: 3") != std::string::npos);
    CHECK(text.find("rank 0: rows [0, 4)") != std::string::npos);
    CHECK(text.find("rank 2: rows [8, 12)") != std::string::npos);
    CHECK(text.find("2 x 2 = 4 candidate pairs") != std::string::npos);
    CHECK(text.find("nt_p = 20") != std::string::npos);
    CHECK_FALSE(fs::exists(cfg.out_dir));

    auto missing = cfg;
    missing.data_path = (ds.dir / "gone.snp1").string();
    CHECK_THROWS_AS(pipeline::dry_run(missing, out), DataFormatError);
}

}  // TEST_SUITE
