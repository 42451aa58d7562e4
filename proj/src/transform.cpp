#include "dopinf/transform.hpp"

#include <string>

#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"

namespace dopinf::transform {

std::vector<double> center_in_place(data::LocalBlock& block) {
    Matrix& q = block.values;
    std::vector<double> means(q.rows());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        const double mean = kernels::sum(q.row(i), q.cols()) /
                            static_cast<double>(q.cols());
        kernels::add_scalar(q.row(i), q.cols(), -mean);
        means[i] = mean;
    }
    return means;
}

std::vector<double> compute_global_scales(const data::LocalBlock& block,
                                          const data::SnapshotHeader& header,
                                          comm::Comm& comm) {
    const Matrix& q = block.values;
    const std::size_t n_vars = header.n_vars;
    const std::size_t nx_i = block.row_range.count();
    std::vector<double> scales(n_vars, 0.0);
    for (std::size_t j = 0; j < n_vars; ++j) {
        scales[j] = kernels::max_abs(q.row(j * nx_i), nx_i * q.cols());
    }
    comm.allreduce(scales, comm::ReduceOp::Max);
    for (std::size_t j = 0; j < n_vars; ++j) {
        if (scales[j] == 0.0) {
            throw DegenerateVariableError(
                "variable '" + header.var_names[j] +
                "' is constant in time; max-abs scaling is undefined");
        }
    }
    return scales;
}

void scale_in_place(data::LocalBlock& block, const std::vector<double>& scales) {
    Matrix& q = block.values;
    const std::size_t nx_i = block.row_range.count();
    for (std::size_t j = 0; j < scales.size(); ++j) {
        kernels::div_scalar(q.row(j * nx_i), nx_i * q.cols(), scales[j]);
    }
}

void inverse_transform_row(double* values, std::size_t count, std::size_t row,
                           const TransformParams& params, std::size_t nx_i) {
    if (row >= params.local_means.size()) {
        throw InvalidArgumentError("inverse_transform_row: row " +
                                   std::to_string(row) +
                                   " outside the local row range");
    }
    kernels::scale_shift(values, count, params.row_scale(row, nx_i),
                         params.local_means[row]);
}

void inverse_transform_block(Matrix& values, const TransformParams& params,
                             std::size_t nx_i) {
    if (values.rows() != params.local_means.size()) {
        throw InvalidArgumentError(
            "inverse_transform_block: row count does not match the transform");
    }
    for (std::size_t i = 0; i < values.rows(); ++i) {
        kernels::scale_shift(values.row(i), values.cols(),
                             params.row_scale(i, nx_i), params.local_means[i]);
    }
}

}  // namespace dopinf::transform
