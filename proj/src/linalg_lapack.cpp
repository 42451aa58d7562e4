#include <lapacke.h>

#include <algorithm>
#include <string>

#include "dopinf/linalg.hpp"

namespace dopinf::linalg {

SymEig symmetric_eig(const Matrix& s) {
    if (s.rows() != s.cols()) {
        throw InvalidArgumentError("symmetric_eig: matrix is not square");
    }
    const lapack_int n = static_cast<lapack_int>(s.rows());
    SymEig out;
    out.values.assign(s.rows(), 0.0);
    out.vectors = s;
    lapack_int info = LAPACKE_dsyev(LAPACK_ROW_MAJOR, 'V', 'U', n,
                                    out.vectors.data(), n, out.values.data());
    if (info != 0) {
        throw SolveError("symmetric eigendecomposition failed (dsyev info=" +
                         std::to_string(info) + ")");
    }
    return out;
}

Matrix spd_solve(Matrix a, Matrix b) {
    if (a.rows() != a.cols()) {
        throw InvalidArgumentError("spd_solve: matrix is not square");
    }
    if (a.rows() != b.rows()) {
        throw InvalidArgumentError("spd_solve: right-hand side row count differs");
    }
    const lapack_int n = static_cast<lapack_int>(a.rows());
    const lapack_int nrhs = static_cast<lapack_int>(b.cols());
    lapack_int info = LAPACKE_dposv(LAPACK_ROW_MAJOR, 'U', n, nrhs, a.data(), n,
                                    b.data(), nrhs == 0 ? 1 : nrhs);
    if (info != 0) {
        throw SolveError("positive definite solve failed (dposv info=" +
                         std::to_string(info) + ")");
    }
    return b;
}

ThinSvd thin_svd(const Matrix& a) {
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    Matrix work = a;
    ThinSvd out;
    out.u = Matrix(a.rows(), static_cast<std::size_t>(k));
    out.sigma.assign(static_cast<std::size_t>(k), 0.0);
    out.vt = Matrix(static_cast<std::size_t>(k), a.cols());
    std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(1, k - 1)));
    lapack_int info = LAPACKE_dgesvd(LAPACK_ROW_MAJOR, 'S', 'S', m, n,
                                     work.data(), n, out.sigma.data(),
                                     out.u.data(), k, out.vt.data(), n,
                                     superb.data());
    if (info != 0) {
        throw SolveError("singular value decomposition failed (dgesvd info=" +
                         std::to_string(info) + ")");
    }
    return out;
}

}  // namespace dopinf::linalg
