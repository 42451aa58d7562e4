#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dopinf/kernels.hpp"
#include "dopinf/synth.hpp"

using namespace dopinf;

namespace {

std::vector<double> random_vec(synth::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

const std::vector<std::size_t> kLengths = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 100};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("backend plumbing") {
    const auto avail = kernels::available();
    REQUIRE(!avail.empty());
    CHECK(avail.front() == kernels::Backend::Scalar);
    CHECK(std::string(kernels::backend_name(kernels::Backend::Scalar)) == "scalar");

    CHECK(kernels::set_backend("scalar"));
    CHECK(kernels::active() == kernels::Backend::Scalar);

    const kernels::Backend before = kernels::active();
    CHECK(!kernels::set_backend("bogus"));
    CHECK(kernels::active() == before);

    CHECK(kernels::set_backend("auto"));
}

TEST_CASE("every available backend matches plain-loop references") {
    synth::Rng rng(2024);
    for (kernels::Backend backend : kernels::available()) {
        CAPTURE(kernels::backend_name(backend));
        REQUIRE(kernels::set_backend(kernels::backend_name(backend)));
        for (std::size_t n : kLengths) {
            CAPTURE(n);
            const auto a = random_vec(rng, n);
            const auto b = random_vec(rng, n);

            double dot_ref = 0.0, sum_ref = 0.0, amax_ref = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dot_ref += a[i] * b[i];
                sum_ref += a[i];
                amax_ref = std::max(amax_ref, std::fabs(a[i]));
            }
            CHECK(kernels::dot(a.data(), b.data(), n) ==
                  doctest::Approx(dot_ref).epsilon(1e-12));
            CHECK(kernels::sum(a.data(), n) ==
                  doctest::Approx(sum_ref).epsilon(1e-12));
            CHECK(kernels::max_abs(a.data(), n) == amax_ref);

            auto y = b;
            kernels::axpy(0.75, a.data(), y.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(y[i] == doctest::Approx(b[i] + 0.75 * a[i]).epsilon(1e-14));
            }

            auto acc = b;
            kernels::add(acc.data(), a.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(acc[i] == b[i] + a[i]);

            auto lo = b;
            kernels::elem_min(lo.data(), a.data(), n);
            auto hi = b;
            kernels::elem_max(hi.data(), a.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(lo[i] == std::min(a[i], b[i]));
                CHECK(hi[i] == std::max(a[i], b[i]));
            }

            auto shifted = a;
            kernels::add_scalar(shifted.data(), n, 2.5);
            auto scaled = a;
            kernels::div_scalar(scaled.data(), n, 4.0);
            auto affine = a;
            kernels::scale_shift(affine.data(), n, 3.0, -1.0);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(shifted[i] == a[i] + 2.5);
                CHECK(scaled[i] == a[i] / 4.0);
                CHECK(affine[i] ==
                      doctest::Approx(3.0 * a[i] - 1.0).epsilon(1e-14));
            }
        }
    }
    kernels::set_backend("auto");
}

TEST_CASE("reductions agree across backends up to round-off") {
    synth::Rng rng(99);
    const auto x = random_vec(rng, 1537);
    const auto y = random_vec(rng, 1537);
    std::vector<double> dots, sums;
    for (kernels::Backend backend : kernels::available()) {
        REQUIRE(kernels::set_backend(kernels::backend_name(backend)));
        dots.push_back(kernels::dot(x.data(), y.data(), x.size()));
        sums.push_back(kernels::sum(x.data(), x.size()));
    }
    for (std::size_t i = 1; i < dots.size(); ++i) {
        CHECK(dots[i] == doctest::Approx(dots[0]).epsilon(1e-12));
        CHECK(sums[i] == doctest::Approx(sums[0]).epsilon(1e-12));
    }
    kernels::set_backend("auto");
}

}  // TEST_SUITE
