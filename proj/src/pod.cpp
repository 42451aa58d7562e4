#include "dopinf/pod.hpp"

#include <cmath>
#include <string>

#include "dopinf/errors.hpp"
#include "dopinf/linalg.hpp"

namespace dopinf::pod {

Matrix local_gram(const data::LocalBlock& block) {
    return linalg::gram(block.values);
}

Matrix global_gram(Matrix local, comm::Comm& comm) {
    comm.allreduce(local.flat(), comm::ReduceOp::Sum);
    return local;
}

EigenSpectrum eig_sym_desc(const Matrix& d) {
    linalg::SymEig eig = linalg::symmetric_eig(d);
    const std::size_t nt = d.rows();

    EigenSpectrum out;
    out.eigenvalues.resize(nt);
    out.eigenvectors = Matrix(nt, nt);
    for (std::size_t k = 0; k < nt; ++k) {
        const std::size_t src = nt - 1 - k;  // ascending -> descending
        out.eigenvalues[k] = eig.values[src];
        for (std::size_t i = 0; i < nt; ++i) {
            out.eigenvectors(i, k) = eig.vectors(i, src);
        }
    }

    const double lambda1 = out.eigenvalues.empty() ? 0.0 : out.eigenvalues.front();
    if (lambda1 < 0.0) {
        throw NotPsdError("Gram matrix is not positive semidefinite "
                          "(largest eigenvalue is negative)");
    }
    const double clamp = 1e-10 * lambda1;
    for (double& lambda : out.eigenvalues) {
        if (lambda < -clamp) {
            throw NotPsdError("Gram matrix has eigenvalue " +
                              std::to_string(lambda) +
                              " below the round-off clamp; data is corrupted");
        }
        if (lambda < 0.0) lambda = 0.0;
    }

    for (std::size_t k = 0; k < nt; ++k) {
        std::size_t pivot = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < nt; ++i) {
            const double mag = std::fabs(out.eigenvectors(i, k));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        if (out.eigenvectors(pivot, k) < 0.0) {
            for (std::size_t i = 0; i < nt; ++i) out.eigenvectors(i, k) = -out.eigenvectors(i, k);
        }
    }
    return out;
}

RankSelection select_rank(const std::vector<double>& eigenvalues, double threshold) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw InvalidArgumentError("select_rank: threshold must lie in (0, 1]");
    }
    double total = 0.0;
    for (double lambda : eigenvalues) total += lambda;
    if (!(total > 0.0)) {
        throw InvalidArgumentError("select_rank: eigenvalue sum must be positive");
    }
    double cumulative = 0.0;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        cumulative += eigenvalues[k];
        if (cumulative / total > threshold) return {k + 1, false};
    }
    return {eigenvalues.size(), true};
}

Matrix reduced_map(const EigenSpectrum& spectrum, std::size_t r) {
    const std::size_t nt = spectrum.eigenvalues.size();
    if (r < 1 || r > nt) {
        throw InvalidArgumentError("reduced_map: r must lie in [1, nt]");
    }
    if (!(spectrum.eigenvalues[r - 1] > 0.0)) {
        throw RankDeficiencyError("reduced dimension " + std::to_string(r) +
                                  " exceeds the numerical rank of the data");
    }
    Matrix tr(nt, r);
    for (std::size_t k = 0; k < r; ++k) {
        const double inv_sqrt = 1.0 / std::sqrt(spectrum.eigenvalues[k]);
        for (std::size_t i = 0; i < nt; ++i) {
            tr(i, k) = spectrum.eigenvectors(i, k) * inv_sqrt;
        }
    }
    return tr;
}

Matrix project(const Matrix& tr, const Matrix& d) {
    return linalg::matmul_tn(tr, d);
}

double retained_energy(const std::vector<double>& eigenvalues, std::size_t r) {
    if (r > eigenvalues.size()) {
        throw InvalidArgumentError("retained_energy: r exceeds spectrum length");
    }
    double total = 0.0;
    double retained = 0.0;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        total += eigenvalues[k];
        if (k < r) retained += eigenvalues[k];
    }
    if (!(total > 0.0)) {
        throw InvalidArgumentError("retained_energy: eigenvalue sum must be positive");
    }
    return retained / total;
}

}  // namespace dopinf::pod
