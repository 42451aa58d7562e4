#include "doctest.h"

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "dopinf/comm.hpp"
#include "dopinf/errors.hpp"

using namespace dopinf;

TEST_SUITE("comm") {

TEST_CASE("allreduce sum, max, min") {
    for (int size : {1, 2, 4, 7}) {
        CAPTURE(size);
        std::mutex mu;
        std::vector<std::vector<double>> results(static_cast<std::size_t>(size));
        comm::run_on_workers(size, [&](comm::Comm& c) {
            const double base = static_cast<double>(c.rank());
            std::vector<double> data = {base, -base, base + 0.5};
            c.allreduce(data, comm::ReduceOp::Sum);

            std::vector<double> peak = {base};
            c.allreduce(peak, comm::ReduceOp::Max);
            std::vector<double> valley = {base};
            c.allreduce(valley, comm::ReduceOp::Min);

            std::lock_guard lock(mu);
            results[static_cast<std::size_t>(c.rank())] = {data[0], data[1], data[2],
                                                           peak[0], valley[0]};
        });
        const double tri = size * (size - 1) / 2.0;
        for (const auto& r : results) {
            REQUIRE(r.size() == 5);
            CHECK(r[0] == tri);
            CHECK(r[1] == -tri);
            CHECK(r[2] == tri + 0.5 * size);
            CHECK(r[3] == static_cast<double>(size - 1));
            CHECK(r[4] == 0.0);
        }
    }
}

TEST_CASE("allreduce is bitwise identical across ranks and repeats") {
    std::mutex mu;
    std::vector<std::vector<double>> first(5), second(5);
    for (auto* runs : {&first, &second}) {
        comm::run_on_workers(5, [&](comm::Comm& c) {
            std::vector<double> data(16);
            for (std::size_t i = 0; i < data.size(); ++i) {
                data[i] = 1.0 / (1.0 + static_cast<double>(c.rank()) +
                                 static_cast<double>(i) * 0.37);
            }
            c.allreduce(data, comm::ReduceOp::Sum);
            std::lock_guard lock(mu);
            (*runs)[static_cast<std::size_t>(c.rank())] = data;
        });
    }
    for (int r = 1; r < 5; ++r) {
        CHECK(first[static_cast<std::size_t>(r)] == first[0]);
    }
    CHECK(second == first);
}

TEST_CASE("broadcast copies the owner's data") {
    std::mutex mu;
    std::vector<std::vector<double>> results(4);
    comm::run_on_workers(4, [&](comm::Comm& c) {
        std::vector<double> data = {static_cast<double>(c.rank()) * 10.0, 1.0};
        c.broadcast(data, 2);
        std::lock_guard lock(mu);
        results[static_cast<std::size_t>(c.rank())] = data;
    });
    for (const auto& r : results) {
        CHECK(r == std::vector<double>{20.0, 1.0});
    }

    comm::run_on_workers(2, [&](comm::Comm& c) {
        std::vector<double> data = {0.0};
        CHECK_THROWS_AS(c.broadcast(data, 5), CollectiveError);
    });
}

TEST_CASE("allreduce_scalar") {
    comm::run_on_workers(3, [](comm::Comm& c) {
        const double s = comm::allreduce_scalar(
            c, static_cast<double>(c.rank() + 1), comm::ReduceOp::Sum);
        CHECK(s == 6.0);
    });
}

TEST_CASE("count mismatch raises the same verdict on every rank") {
    std::atomic<int> collective_errors{0};
    CHECK_THROWS_AS(
        comm::run_on_workers(3,
                             [&](comm::Comm& c) {
                                 std::vector<double> data(
                                     c.rank() == 1 ? 3u : 2u, 1.0);
                                 try {
                                     c.allreduce(data, comm::ReduceOp::Sum);
                                 } catch (const CollectiveError&) {
                                     collective_errors.fetch_add(1);
                                     throw;
                                 }
                             }),
        CollectiveError);
    CHECK(collective_errors.load() == 3);
}

TEST_CASE("op mismatch is detected") {
    CHECK_THROWS_AS(comm::run_on_workers(
                        2,
                        [](comm::Comm& c) {
                            std::vector<double> data = {1.0};
                            c.allreduce(data, c.rank() == 0 ? comm::ReduceOp::Sum
                                                            : comm::ReduceOp::Max);
                        }),
                    CollectiveError);
}

TEST_CASE("run_on_workers rethrows the root cause, not a peer's timeout") {
    CHECK_THROWS_WITH_AS(
        comm::run_on_workers(4,
                             [](comm::Comm& c) {
                                 if (c.rank() == 2) {
                                     throw std::runtime_error("rank 2 exploded");
                                 }
                                 std::vector<double> data = {1.0};
                                 c.allreduce(data, comm::ReduceOp::Sum);
                             }),
        "rank 2 exploded", std::runtime_error);

    CHECK_THROWS_AS(comm::run_on_workers(0, [](comm::Comm&) {}),
                    InvalidArgumentError);
}

TEST_CASE("barrier completes") {
    std::atomic<int> checkpoint{0};
    comm::run_on_workers(6, [&](comm::Comm& c) {
        checkpoint.fetch_add(1);
        c.barrier();
        CHECK(checkpoint.load() == 6);
    });
}

}  // TEST_SUITE
