#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dopinf/data.hpp"
#include "dopinf/matrix.hpp"
#include "dopinf/transform.hpp"

namespace dopinf::oracle {

// Serial reference route for verification: load everything on one rank,
// reduce via a direct thin SVD, and compare against the distributed
// Gram-matrix route. The two paths share no reduction code.

/// Full transformed snapshot matrix (center + optional scale), single
/// reader, plus the header and transform used.
Matrix stacked_transformed(const std::string& data_path, bool scaling,
                           data::SnapshotHeader* header_out = nullptr,
                           transform::TransformParams* params_out = nullptr);

struct SerialReduction {
    std::vector<double> singular_values;  // descending
    Matrix vr;    // m x r POD basis (left singular vectors)
    Matrix qhat;  // r x nt projection Vr' Q
};

/// Thin-SVD reduction of a transformed matrix at fixed r.
SerialReduction svd_reduce(const Matrix& q, std::size_t r);

struct VerifyOptions {
    double energy = 0.9995;
    long fixed_rank = 0;
    bool scaling = false;
    std::string truth_path;               // optional ground-truth file
    std::vector<int> worker_counts = {1, 2, 4};
};

/// Run the oracle comparison suite on a dataset, printing one PASS/FAIL
/// line per check. Returns true when every check passes.
bool verify_dataset(const std::string& data_path, const VerifyOptions& opts,
                    std::ostream& out);

}  // namespace dopinf::oracle
