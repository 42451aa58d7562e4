#include "dopinf/postprocess.hpp"

#include <cmath>
#include <string>

#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"
#include "dopinf/linalg.hpp"

namespace dopinf::postprocess {

Matrix basis_rows(const data::LocalBlock& block, const Matrix& tr,
                  const std::vector<std::size_t>& local_rows) {
    const Matrix& q = block.values;
    if (q.cols() != tr.rows()) {
        throw InvalidArgumentError("basis_rows: block and map disagree on nt");
    }
    Matrix out(local_rows.size(), tr.cols());
    for (std::size_t k = 0; k < local_rows.size(); ++k) {
        const std::size_t row = local_rows[k];
        if (row >= q.rows()) {
            throw InvalidArgumentError("basis_rows: row " + std::to_string(row) +
                                       " outside the local block");
        }
        for (std::size_t j = 0; j < tr.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < q.cols(); ++t) {
                acc += q(row, t) * tr(t, j);
            }
            out(k, j) = acc;
        }
    }
    return out;
}

std::vector<ProbeSeries> reconstruct_probes(const data::LocalBlock& block,
                                            const Matrix& tr, const Matrix& qtilde,
                                            const ProbeSet& probes,
                                            const transform::TransformParams& params) {
    const std::size_t nx_i = block.row_range.count();
    std::vector<ProbeSeries> out;
    for (const Probe& probe : probes) {
        if (probe.index < block.row_range.begin || probe.index >= block.row_range.end) {
            continue;
        }
        const std::size_t local_row =
            probe.var * nx_i + (probe.index - block.row_range.begin);
        const Matrix basis = basis_rows(block, tr, {local_row});

        ProbeSeries series;
        series.probe = probe;
        series.values.resize(qtilde.rows());
        for (std::size_t t = 0; t < qtilde.rows(); ++t) {
            series.values[t] = kernels::dot(basis.row(0), qtilde.row(t), tr.cols());
        }
        transform::inverse_transform_row(series.values.data(), series.values.size(),
                                         local_row, params, nx_i);
        out.push_back(std::move(series));
    }
    return out;
}

Matrix reconstruct_field(const data::LocalBlock& block, const Matrix& tr,
                         const Matrix& qtilde,
                         const transform::TransformParams& params) {
    const Matrix v_ri = linalg::matmul(block.values, tr);
    Matrix field = linalg::matmul_nt(v_ri, qtilde);
    transform::inverse_transform_block(field, params, block.row_range.count());
    return field;
}

double relative_error(const Matrix& reference, const Matrix& approx) {
    if (reference.rows() != approx.rows() || reference.cols() != approx.cols()) {
        throw InvalidArgumentError("relative_error: shapes differ");
    }
    const double ref_norm = linalg::frob_norm(reference);
    if (ref_norm == 0.0) {
        throw InvalidArgumentError("relative_error: reference norm is zero");
    }
    double num = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double diff = reference.data()[i] - approx.data()[i];
        num += diff * diff;
    }
    return std::sqrt(num) / ref_norm;
}

}  // namespace dopinf::postprocess
