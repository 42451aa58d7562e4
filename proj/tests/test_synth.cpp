#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"
#include "dopinf/linalg.hpp"
#include "dopinf/opinf.hpp"
#include "dopinf/pod.hpp"
#include "dopinf/synth.hpp"
#include "helpers.hpp"

using namespace dopinf;
using dopinf::testing::scratch_dir;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return bytes;
}

Matrix stack_variables(const synth::QuadraticData& made) {
    const std::size_t nx = made.header.nx;
    const std::size_t nt = made.header.nt;
    Matrix full(made.header.n_vars * nx, nt);
    for (std::size_t j = 0; j < made.variables.size(); ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t k = 0; k < nt; ++k) {
                full(j * nx + i, k) = made.variables[j](i, k);
            }
        }
    }
    return full;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("rng streams are deterministic and stay in range") {
    synth::Rng a(123), b(123), c(124);
    bool identical = true, all_distinct_seeds_differ = false;
    for (int i = 0; i < 1000; ++i) {
        const double va = a.uniform();
        const double vb = b.uniform();
        if (va != vb) identical = false;
        if (va != c.uniform()) all_distinct_seeds_differ = true;
        CHECK(va >= 0.0);
        CHECK(va < 1.0);
    }
    CHECK(identical);
    CHECK(all_distinct_seeds_differ);

    synth::Rng d(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = d.uniform(2.0, 5.0);
        CHECK(v >= 2.0);
        CHECK(v < 5.0);
    }
}

TEST_CASE("normal draws have roughly standard moments") {
    synth::Rng rng(31);
    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(var > 0.9);
    CHECK(var < 1.1);
}

TEST_CASE("random orthonormal matrices have orthonormal columns") {
    const Matrix v = synth::random_orthonormal(30, 6, 11);
    const Matrix vtv = linalg::matmul_tn(v, v);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(vtv(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
    }
    CHECK(v == synth::random_orthonormal(30, 6, 11));
    CHECK_THROWS_AS(synth::random_orthonormal(3, 4, 1), InvalidArgumentError);
}

TEST_CASE("quadratic datasets are reproducible") {
    synth::QuadraticSpec spec;
    spec.n_vars = 2;
    spec.nx = 15;
    spec.r_true = 3;
    spec.nt = 30;
    spec.nt_p = 60;
    spec.seed = 77;

    const auto first = synth::make_quadratic(spec);
    const auto second = synth::make_quadratic(spec);
    REQUIRE(first.variables.size() == 2);
    CHECK(first.variables[0] == second.variables[0]);
    CHECK(first.variables[1] == second.variables[1]);
    CHECK(first.truth.z == second.truth.z);
    CHECK(first.truth.v == second.truth.v);
    CHECK(first.truth.mu == second.truth.mu);
    CHECK(first.truth.ops.a == second.truth.ops.a);
    CHECK(first.truth.ops.f == second.truth.ops.f);
    CHECK(first.truth.ops.c == second.truth.ops.c);

    spec.seed = 78;
    const auto other = synth::make_quadratic(spec);
    CHECK_FALSE(first.variables[0] == other.variables[0]);
}

TEST_CASE("centered quadratic data has numerical rank r_true") {
    synth::QuadraticSpec spec;
    spec.n_vars = 1;
    spec.nx = 80;
    spec.r_true = 4;
    spec.nt = 40;
    spec.nt_p = 40;
    spec.seed = 5;

    const auto made = synth::make_quadratic(spec);
    Matrix full = stack_variables(made);
    for (std::size_t i = 0; i < full.rows(); ++i) {
        double mean = 0.0;
        for (std::size_t k = 0; k < spec.nt; ++k) mean += full(i, k);
        mean /= static_cast<double>(spec.nt);
        for (std::size_t k = 0; k < spec.nt; ++k) full(i, k) -= mean;
    }
    const auto spectrum = pod::eig_sym_desc(linalg::gram(full));
    REQUIRE(spectrum.eigenvalues.size() == spec.nt);
    const double lead = spectrum.eigenvalues[0];
    REQUIRE(lead > 0.0);
    // The affine embedding is exactly r_true-dimensional after centering,
    // so everything past r_true is round-off.
    CHECK(spectrum.eigenvalues[spec.r_true - 1] > 1e-8 * lead);
    CHECK(spectrum.eigenvalues[spec.r_true] <= 1e-12 * lead);
}

TEST_CASE("truth files round trip") {
    synth::QuadraticSpec spec;
    spec.n_vars = 1;
    spec.nx = 12;
    spec.r_true = 2;
    spec.nt = 10;
    spec.nt_p = 25;
    spec.seed = 300;
    const auto made = synth::make_quadratic(spec);

    const auto dir = scratch_dir("truth");
    const std::string path = (dir / "model.truth").string();
    synth::write_truth(path, made.truth);
    const auto loaded = synth::read_truth(path);
    CHECK(loaded.ops.a == made.truth.ops.a);
    CHECK(loaded.ops.f == made.truth.ops.f);
    CHECK(loaded.ops.c == made.truth.ops.c);
    CHECK(loaded.v == made.truth.v);
    CHECK(loaded.mu == made.truth.mu);
    CHECK(loaded.z == made.truth.z);
    std::filesystem::remove_all(dir);
}

TEST_CASE("generated files are byte identical across runs") {
    synth::QuadraticSpec spec;
    spec.n_vars = 1;
    spec.nx = 20;
    spec.r_true = 2;
    spec.nt = 16;
    spec.nt_p = 32;
    spec.seed = 44;

    const auto dir = scratch_dir("regen");
    const std::string data_a = (dir / "a.snp1").string();
    const std::string data_b = (dir / "b.snp1").string();
    synth::generate_quadratic(spec, data_a, data_a + ".truth");
    synth::generate_quadratic(spec, data_b, data_b + ".truth");
    CHECK(slurp(data_a) == slurp(data_b));
    CHECK(slurp(data_a + ".truth") == slurp(data_b + ".truth"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("quadratic feature change of basis matches direct evaluation") {
    synth::Rng rng(71);
    const std::size_t r = 4;
    Matrix g(r, r);
    for (double& v : g.flat()) v = rng.normal();
    std::vector<double> q(r);
    for (double& v : q) v = rng.normal();

    std::vector<double> gq(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) gq[i] = kernels::dot(g.row(i), q.data(), r);

    const auto direct = opinf::quad_nonredundant(gq);
    const auto mapped_features = opinf::quad_nonredundant(q);
    const Matrix m = synth::quad_feature_change(g);
    REQUIRE(m.rows() == direct.size());
    REQUIRE(m.cols() == mapped_features.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        const double via_m = kernels::dot(m.row(i), mapped_features.data(),
                                          mapped_features.size());
        CHECK(via_m == doctest::Approx(direct[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(synth::quad_feature_change(Matrix(2, 3)), InvalidArgumentError);
}

TEST_CASE("quadratic shift identity matches direct evaluation") {
    synth::Rng rng(72);
    const std::size_t r = 5;
    std::vector<double> q(r), a(r);
    for (double& v : q) v = rng.normal();
    for (double& v : a) v = rng.normal();

    std::vector<double> shifted(r);
    for (std::size_t i = 0; i < r; ++i) shifted[i] = q[i] + a[i];
    const auto direct = opinf::quad_nonredundant(shifted);

    const auto base = opinf::quad_nonredundant(q);
    const auto offset = opinf::quad_nonredundant(a);
    const Matrix b = synth::quad_shift_linear(a);
    REQUIRE(b.rows() == base.size());
    REQUIRE(b.cols() == r);
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double via_b =
            base[i] + kernels::dot(b.row(i), q.data(), r) + offset[i];
        CHECK(via_b == doctest::Approx(direct[i]).epsilon(1e-12));
    }
}

TEST_CASE("latent training mean averages the leading rows") {
    synth::QuadraticTruth truth;
    truth.z = Matrix(4, 2, {1, 10, 3, 30, 5, 50, 100, 1000});
    const auto mean = synth::latent_training_mean(truth, 3);
    REQUIRE(mean.size() == 2);
    CHECK(mean[0] == doctest::Approx(3.0));
    CHECK(mean[1] == doctest::Approx(30.0));
    CHECK_THROWS_AS(synth::latent_training_mean(truth, 5), InvalidArgumentError);
    CHECK_THROWS_AS(synth::latent_training_mean(truth, 0), InvalidArgumentError);
}

TEST_CASE("diffusion snapshots decay and a single mode stays rank one") {
    synth::DiffusionSpec spec;
    spec.nx = 40;
    spec.nt = 30;
    spec.length = 1.0;
    spec.kappa = 1.0;
    spec.single_mode = 1;
    const double dx = spec.length / static_cast<double>(spec.nx + 1);
    spec.dt = 0.4 * dx * dx / spec.kappa;

    const Matrix snaps = synth::make_diffusion(spec);
    REQUIRE(snaps.rows() == spec.nx);
    REQUIRE(snaps.cols() == spec.nt);

    // A sine mode is an eigenvector of the update, so columns shrink
    // geometrically and the matrix is rank one.
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < spec.nt; ++k) {
        double col = 0.0;
        for (std::size_t i = 0; i < spec.nx; ++i) col += snaps(i, k) * snaps(i, k);
        CHECK(col < prev);
        prev = col;
    }
    const auto spectrum = pod::eig_sym_desc(linalg::gram(snaps));
    CHECK(spectrum.eigenvalues[1] <= 1e-12 * spectrum.eigenvalues[0]);
}

TEST_CASE("diffusion rejects unstable or malformed settings") {
    synth::DiffusionSpec spec;
    spec.nx = 50;
    spec.nt = 10;
    spec.length = 1.0;
    spec.kappa = 1.0;
    spec.dt = 1.0;  // far beyond the stability bound for dx ~ 1/51
    CHECK_THROWS_AS(synth::make_diffusion(spec), InvalidArgumentError);

    spec.dt = 1e-5;
    spec.nx = 0;
    CHECK_THROWS_AS(synth::make_diffusion(spec), InvalidArgumentError);
    spec.nx = 50;
    spec.nt = 1;
    CHECK_THROWS_AS(synth::make_diffusion(spec), InvalidArgumentError);
    spec.nt = 10;
    spec.kappa = 0.0;
    CHECK_THROWS_AS(synth::make_diffusion(spec), InvalidArgumentError);
}

TEST_CASE("quadratic generator validates its specification") {
    synth::QuadraticSpec spec;
    spec.n_vars = 1;
    spec.nx = 10;
    spec.r_true = 3;
    spec.nt = 10;
    spec.nt_p = 10;

    auto broken = spec;
    broken.r_true = 0;
    CHECK_THROWS_AS(synth::make_quadratic(broken), InvalidArgumentError);
    broken = spec;
    broken.r_true = 11;
    CHECK_THROWS_AS(synth::make_quadratic(broken), InvalidArgumentError);
    broken = spec;
    broken.nt = 1;
    broken.nt_p = 1;
    CHECK_THROWS_AS(synth::make_quadratic(broken), InvalidArgumentError);
    broken = spec;
    broken.nt_p = 5;
    CHECK_THROWS_AS(synth::make_quadratic(broken), InvalidArgumentError);
    broken = spec;
    broken.nt = 3;
    broken.nt_p = 10;
    CHECK_THROWS_AS(synth::make_quadratic(broken), InvalidArgumentError);
}

TEST_CASE("truth file loader rejects damage") {
    synth::QuadraticSpec spec;
    spec.n_vars = 1;
    spec.nx = 8;
    spec.r_true = 2;
    spec.nt = 8;
    spec.nt_p = 12;
    spec.seed = 2;
    const auto made = synth::make_quadratic(spec);

    const auto dir = scratch_dir("truthbad");
    const std::string path = (dir / "m.truth").string();
    synth::write_truth(path, made.truth);

    std::string bytes = slurp(path);
    bytes.resize(bytes.size() - 9);
    std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
    CHECK_THROWS_AS(synth::read_truth(path), DataFormatError);

    bytes[0] = 'X';
    std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
    CHECK_THROWS_AS(synth::read_truth(path), DataFormatError);

    CHECK_THROWS_AS(synth::read_truth((dir / "missing.truth").string()),
                    DataFormatError);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
