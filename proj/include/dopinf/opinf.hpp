#pragma once

#include <cstddef>
#include <vector>

#include "dopinf/matrix.hpp"

namespace dopinf::opinf {

// Learning kernel for the discrete quadratic model
//   q[k+1] = A q[k] + F quad(q[k]) + c
// with nonredundant quadratic features of length s = r(r+1)/2 and an
// operator matrix learned from Tikhonov-regularized normal equations.

struct ReducedOperators {
    Matrix a;               // r x r
    Matrix f;               // r x s
    std::vector<double> c;  // length r
};

struct OpInfData {
    Matrix dhat;      // K x d, columns [states | quad features | ones]
    Matrix qhat2t;    // K x r, row k = reduced snapshot k+1
    bool underdetermined = false;  // K < d; regularization required
};

struct RegPair {
    double beta1 = 0.0;
    double beta2 = 0.0;

    friend bool operator==(const RegPair&, const RegPair&) = default;
};

inline std::size_t quad_len(std::size_t r) { return r * (r + 1) / 2; }

/// Nonredundant quadratic features: blocks i = 0..r-1 of the products
/// q_i * q_j for j = i..r-1.
std::vector<double> quad_nonredundant(const std::vector<double>& q);

/// Same map written into a caller buffer of length quad_len(r).
void quad_features_into(const double* q, std::size_t r, double* out);

/// Row-wise feature map, K x r -> K x s.
Matrix quad_nonredundant_rows(const Matrix& q);

/// Build the least-squares data from the reduced trajectory (r x nt):
/// Dhat rows pair snapshot k with target snapshot k+1.
OpInfData assemble_data(const Matrix& qhat);

/// Diagonal Tikhonov weights: beta1 on the r state columns and the ones
/// column, beta2 on the s quadratic columns.
std::vector<double> build_regularizer(std::size_t r, std::size_t s, RegPair pair);

/// Solve (Dhat' Dhat + diag(gamma)) X = Dhat' Qhat2T and slice the
/// operators out of Ohat = X'.
ReducedOperators solve_opinf(const OpInfData& data, const std::vector<double>& gamma);

}  // namespace dopinf::opinf
