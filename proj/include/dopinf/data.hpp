#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dopinf/matrix.hpp"

namespace dopinf::data {

// Snapshot container ("SNP1"): magic 0x53 0x4E 0x50 0x31, little-endian
// u64 n_vars / nx / nt, then each variable name as u32 byte length plus
// UTF-8 bytes, then per variable an nx x nt real64 matrix stored
// row-major. Row-major per variable makes a rank's row slice a single
// contiguous byte range, so partitioned reads never touch foreign bytes.

struct SnapshotHeader {
    std::uint64_t n_vars = 0;
    std::uint64_t nx = 0;
    std::uint64_t nt = 0;
    std::vector<std::string> var_names;
};

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t count() const { return end - begin; }
    friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Half-open row intervals over [0, nx), one per rank, in rank order.
using PartitionPlan = std::vector<RowRange>;

/// One rank's slice of the snapshot file. Variables are stacked
/// vertically in header order: block row j*nx_i + k holds variable j at
/// global spatial index row_range.begin + k.
struct LocalBlock {
    int rank = 0;
    RowRange row_range;
    Matrix values;  // (n_vars * nx_i) x nt
};

/// Split nx rows over p ranks: everyone gets floor(nx/p) rows and the
/// remainder goes to the last rank. Throws PartitionError unless
/// 1 <= p <= nx.
PartitionPlan partition_rows(std::size_t nx, int p);

void write_snapshots(const std::string& path, const SnapshotHeader& header,
                     const std::vector<Matrix>& variables);

SnapshotHeader read_header(const std::string& path);

LocalBlock read_block(const std::string& path, const PartitionPlan& plan,
                      int rank, const SnapshotHeader& header);

}  // namespace dopinf::data
