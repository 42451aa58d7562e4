#include "dopinf/linalg.hpp"

#include <cmath>

#include "dopinf/kernels.hpp"

namespace dopinf::linalg {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw InvalidArgumentError(msg);
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t l = 0; l < a.cols(); ++l) {
            kernels::axpy(a(i, l), b.row(l), c.row(i), b.cols());
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn: row counts differ");
    Matrix c(a.cols(), b.cols());
    for (std::size_t l = 0; l < a.rows(); ++l) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            kernels::axpy(a(l, i), b.row(l), c.row(i), b.cols());
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt: column counts differ");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            c(i, j) = kernels::dot(a.row(i), b.row(j), a.cols());
        }
    }
    return c;
}

Matrix gram(const Matrix& a) {
    Matrix c(a.cols(), a.cols());
    for (std::size_t l = 0; l < a.rows(); ++l) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            kernels::axpy(a(l, i), a.row(l), c.row(i), a.cols());
        }
    }
    return c;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    require(a.cols() == x.size(), "matvec: dimension mismatch");
    std::vector<double> y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        y[i] = kernels::dot(a.row(i), x.data(), a.cols());
    }
    return y;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

double frob_norm(const Matrix& a) {
    return std::sqrt(kernels::dot(a.data(), a.data(), a.size()));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            "max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    }
    return m;
}

}  // namespace dopinf::linalg
