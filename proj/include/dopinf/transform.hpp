#pragma once

#include <vector>

#include "dopinf/comm.hpp"
#include "dopinf/data.hpp"
#include "dopinf/matrix.hpp"

namespace dopinf::transform {

/// Centering shift and (optional) scaling learned from the training
/// block. Means are per local row; scales are per variable and identical
/// on all ranks after the reduction.
struct TransformParams {
    std::vector<double> local_means;
    std::vector<double> scales;  // length n_vars when scaling is on, else empty
    bool scaling_enabled = false;

    /// Scale applied to local row `row` (1 when scaling is off).
    double row_scale(std::size_t row, std::size_t nx_i) const {
        return scaling_enabled ? scales[row / nx_i] : 1.0;
    }
};

/// Subtract each row's temporal mean in place and return the means.
/// Rank-local, no communication.
std::vector<double> center_in_place(data::LocalBlock& block);

/// Global per-variable max-abs of the centered block: one MAX allreduce
/// over n_vars values. Throws DegenerateVariableError when a variable is
/// identically zero after centering (constant in time everywhere).
std::vector<double> compute_global_scales(const data::LocalBlock& block,
                                          const data::SnapshotHeader& header,
                                          comm::Comm& comm);

/// Divide each variable's rows by its scale, in place.
void scale_in_place(data::LocalBlock& block, const std::vector<double>& scales);

/// Map one transformed local row's time series back to original
/// coordinates: x -> x * scale + mean. Throws InvalidArgumentError when
/// `row` is outside the local row range.
void inverse_transform_row(double* values, std::size_t count, std::size_t row,
                           const TransformParams& params, std::size_t nx_i);

/// Row-wise inverse over a whole local block (rows = local rows).
void inverse_transform_block(Matrix& values, const TransformParams& params,
                             std::size_t nx_i);

}  // namespace dopinf::transform
