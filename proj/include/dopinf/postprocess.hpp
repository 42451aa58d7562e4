#pragma once

#include <cstddef>
#include <vector>

#include "dopinf/data.hpp"
#include "dopinf/matrix.hpp"
#include "dopinf/transform.hpp"

namespace dopinf::postprocess {

/// A sampling location: variable index and global spatial index.
struct Probe {
    std::size_t var = 0;
    std::size_t index = 0;

    friend bool operator==(const Probe&, const Probe&) = default;
};

using ProbeSet = std::vector<Probe>;

/// Rows of the POD basis for the given local rows: row k of the result
/// is (block row local_rows[k]) * Tr. The block must be the transformed
/// block the Gram matrix was built from.
Matrix basis_rows(const data::LocalBlock& block, const Matrix& tr,
                  const std::vector<std::size_t>& local_rows);

struct ProbeSeries {
    Probe probe;
    std::vector<double> values;  // nt_p entries, original coordinates
};

/// Reconstruct the time series of every probe this rank owns (its row
/// range contains the probe's spatial index) in original coordinates.
/// Unowned probes simply produce no entry. `qtilde` has rows as time.
std::vector<ProbeSeries> reconstruct_probes(const data::LocalBlock& block,
                                            const Matrix& tr, const Matrix& qtilde,
                                            const ProbeSet& probes,
                                            const transform::TransformParams& params);

/// Reconstruct this rank's whole field, (n_vars * nx_i) x nt_p, in
/// original coordinates. No communication.
Matrix reconstruct_field(const data::LocalBlock& block, const Matrix& tr,
                         const Matrix& qtilde,
                         const transform::TransformParams& params);

/// Frobenius-norm relative mismatch |ref - approx| / |ref|.
double relative_error(const Matrix& reference, const Matrix& approx);

}  // namespace dopinf::postprocess
