#include "dopinf/opinf.hpp"

#include "dopinf/errors.hpp"
#include "dopinf/linalg.hpp"

namespace dopinf::opinf {

void quad_features_into(const double* q, std::size_t r, double* out) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i; j < r; ++j) {
            out[pos++] = q[i] * q[j];
        }
    }
}

std::vector<double> quad_nonredundant(const std::vector<double>& q) {
    if (q.empty()) throw InvalidArgumentError("quad_nonredundant: r must be >= 1");
    std::vector<double> out(quad_len(q.size()));
    quad_features_into(q.data(), q.size(), out.data());
    return out;
}

Matrix quad_nonredundant_rows(const Matrix& q) {
    if (q.cols() == 0) throw InvalidArgumentError("quad_nonredundant_rows: r must be >= 1");
    Matrix out(q.rows(), quad_len(q.cols()));
    for (std::size_t k = 0; k < q.rows(); ++k) {
        quad_features_into(q.row(k), q.cols(), out.row(k));
    }
    return out;
}

OpInfData assemble_data(const Matrix& qhat) {
    const std::size_t r = qhat.rows();
    const std::size_t nt = qhat.cols();
    if (nt < 2) {
        throw InvalidArgumentError("assemble_data: need at least 2 snapshots");
    }
    const std::size_t big_k = nt - 1;
    const std::size_t s = quad_len(r);
    const std::size_t d = r + s + 1;

    OpInfData data;
    data.dhat = Matrix(big_k, d);
    data.qhat2t = Matrix(big_k, r);
    std::vector<double> state(r);
    for (std::size_t k = 0; k < big_k; ++k) {
        double* row = data.dhat.row(k);
        for (std::size_t i = 0; i < r; ++i) {
            row[i] = qhat(i, k);
            data.qhat2t(k, i) = qhat(i, k + 1);
        }
        quad_features_into(row, r, row + r);
        row[r + s] = 1.0;
    }
    data.underdetermined = big_k < d;
    return data;
}

std::vector<double> build_regularizer(std::size_t r, std::size_t s, RegPair pair) {
    if (!(pair.beta1 > 0.0) || !(pair.beta2 > 0.0)) {
        throw InvalidArgumentError("build_regularizer: betas must be positive");
    }
    std::vector<double> gamma(r + s + 1, pair.beta1);
    for (std::size_t i = r; i < r + s; ++i) gamma[i] = pair.beta2;
    return gamma;
}

ReducedOperators solve_opinf(const OpInfData& data, const std::vector<double>& gamma) {
    const std::size_t d = data.dhat.cols();
    const std::size_t r = data.qhat2t.cols();
    const std::size_t s = quad_len(r);
    if (gamma.size() != d) {
        throw InvalidArgumentError("solve_opinf: regularizer length mismatch");
    }

    Matrix lhs = linalg::gram(data.dhat);
    for (std::size_t i = 0; i < d; ++i) lhs(i, i) += gamma[i];
    Matrix rhs = linalg::matmul_tn(data.dhat, data.qhat2t);
    Matrix x = linalg::spd_solve(std::move(lhs), std::move(rhs));  // d x r

    ReducedOperators ops;
    ops.a = Matrix(r, r);
    ops.f = Matrix(r, s);
    ops.c.assign(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) ops.a(i, j) = x(j, i);
        for (std::size_t j = 0; j < s; ++j) ops.f(i, j) = x(r + j, i);
        ops.c[i] = x(r + s, i);
    }
    return ops;
}

}  // namespace dopinf::opinf
