#pragma once

#include <cstddef>
#include <vector>

#include "dopinf/comm.hpp"
#include "dopinf/data.hpp"
#include "dopinf/matrix.hpp"

namespace dopinf::pod {

// Dimensionality reduction without assembling a global basis: each rank
// contributes Qi' Qi, the summed Gram matrix is eigendecomposed
// redundantly on every rank (it is nt x nt, small), and the reduced
// trajectory comes from Qhat = Tr' D.

struct EigenSpectrum {
    std::vector<double> eigenvalues;  // descending, clamped to >= 0
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

struct RankSelection {
    std::size_t r = 0;
    bool capped = false;  // threshold never strictly exceeded, fell back to nt
};

/// Local Gram summand Qi' Qi (nt x nt, symmetric).
Matrix local_gram(const data::LocalBlock& block);

/// SUM allreduce of the local summands. Bitwise identical on all ranks.
Matrix global_gram(Matrix local, comm::Comm& comm);

/// Eigendecomposition of the Gram matrix, eigenvalues descending.
/// Negative eigenvalues within round-off (>= -1e-10 * lambda_1) clamp to
/// zero; anything lower throws NotPsdError. Each eigenvector column is
/// flipped so its largest-magnitude entry (lowest index on ties) is
/// positive, making results reproducible across solvers.
EigenSpectrum eig_sym_desc(const Matrix& d);

/// Smallest r whose cumulative energy fraction strictly exceeds
/// `threshold`. When no prefix does, returns nt with `capped` set.
RankSelection select_rank(const std::vector<double>& eigenvalues, double threshold);

/// Tr = U_r Lambda_r^{-1/2} (nt x r). Throws RankDeficiencyError when
/// lambda_r is zero (r exceeds the numerical rank).
Matrix reduced_map(const EigenSpectrum& spectrum, std::size_t r);

/// Qhat = Tr' D (r x nt), the reduced training trajectory.
Matrix project(const Matrix& tr, const Matrix& d);

/// Energy fraction captured by the leading r eigenvalues.
double retained_energy(const std::vector<double>& eigenvalues, std::size_t r);

}  // namespace dopinf::pod
