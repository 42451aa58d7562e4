#pragma once

#include <vector>

#include "dopinf/matrix.hpp"

namespace dopinf::linalg {

// Dense helpers on row-major matrices. All shape mismatches throw
// InvalidArgumentError. The multiply loops are arranged so the inner
// traversal is a contiguous row, handled by the kernel layer.

Matrix matmul(const Matrix& a, const Matrix& b);     // A B
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // Aᵀ B
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // A Bᵀ

/// Aᵀ A. The accumulation order makes the result bitwise symmetric.
Matrix gram(const Matrix& a);

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

Matrix transpose(const Matrix& a);

double frob_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

struct SymEig {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column j pairs with values[j]
};

/// Full eigendecomposition of a symmetric matrix (LAPACK dsyev).
SymEig symmetric_eig(const Matrix& s);

/// Solve A X = B for symmetric positive definite A (LAPACK dposv).
/// Throws SolveError when A is not positive definite.
Matrix spd_solve(Matrix a, Matrix b);

struct ThinSvd {
    Matrix u;                   // m x min(m,n)
    std::vector<double> sigma;  // descending
    Matrix vt;                  // min(m,n) x n
};

/// Thin SVD (LAPACK dgesvd). Used by the serial verification path.
ThinSvd thin_svd(const Matrix& a);

}  // namespace dopinf::linalg
