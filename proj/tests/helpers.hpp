#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "dopinf/data.hpp"
#include "dopinf/matrix.hpp"
#include "dopinf/synth.hpp"

namespace dopinf::testing {

inline Matrix random_matrix(synth::Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.flat()) v = rng.normal();
    return m;
}

/// Carve rank `rank`'s block out of a full stacked matrix held in memory,
/// mirroring the on-disk layout (variables stacked, rows partitioned).
inline data::LocalBlock slice_block(const Matrix& full, std::size_t n_vars,
                                    std::size_t nx, const data::PartitionPlan& plan,
                                    int rank) {
    const data::RowRange range = plan[static_cast<std::size_t>(rank)];
    const std::size_t nx_i = range.count();
    const std::size_t nt = full.cols();
    data::LocalBlock block;
    block.rank = rank;
    block.row_range = range;
    block.values = Matrix(n_vars * nx_i, nt);
    for (std::size_t j = 0; j < n_vars; ++j) {
        for (std::size_t k = 0; k < nx_i; ++k) {
            const double* src = full.row(j * nx + range.begin + k);
            double* dst = block.values.row(j * nx_i + k);
            for (std::size_t t = 0; t < nt; ++t) dst[t] = src[t];
        }
    }
    return block;
}

/// Fresh scratch directory under the system temp root, removed by the
/// caller if it cares; unique per call within the process.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("dopinf_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace dopinf::testing
