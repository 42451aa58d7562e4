#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dopinf/data.hpp"
#include "dopinf/matrix.hpp"
#include "dopinf/opinf.hpp"

namespace dopinf::synth {

// Synthetic datasets with known structure, standing in for a flow solver:
// a quadratic system with ground-truth operators embedded in an exact
// r-dimensional affine subspace, and a 1D diffusion dataset with fast
// spectral decay.

/// Deterministic normal/uniform source. mt19937_64 plus hand-rolled
/// Box-Muller, so streams do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform();                     // [0, 1)
    double uniform(double lo, double hi);
    double normal();

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// m x r matrix with orthonormal columns (Gram-Schmidt, run twice).
Matrix random_orthonormal(std::size_t m, std::size_t r, std::uint64_t seed);
Matrix random_orthonormal(std::size_t m, std::size_t r, Rng& rng);

struct QuadraticSpec {
    std::size_t n_vars = 1;
    std::size_t nx = 0;      // state dimension n = n_vars * nx
    std::size_t r_true = 0;
    std::size_t nt = 0;      // training snapshots written to the data file
    std::size_t nt_p = 0;    // latent trajectory length kept in the truth file
    std::uint64_t seed = 0;
};

struct QuadraticTruth {
    opinf::ReducedOperators ops;  // latent A*, F*, c*
    Matrix v;                     // n x r embedding, orthonormal columns
    std::vector<double> mu;       // length-n affine offset
    Matrix z;                     // nt_p x r latent trajectory, rows are time
};

struct QuadraticData {
    data::SnapshotHeader header;
    std::vector<Matrix> variables;  // n_vars matrices, nx x nt each
    QuadraticTruth truth;
};

/// Draw a stable latent system (rotation-structured A* with spectral
/// radius below 1, small F* and c*), integrate it, and embed the latent
/// trajectory affinely into n dimensions. Divergent draws are rejected
/// and re-sampled; persistent divergence is an error.
QuadraticData make_quadratic(const QuadraticSpec& spec);

/// make_quadratic plus serialization of the snapshot and truth files.
QuadraticTruth generate_quadratic(const QuadraticSpec& spec,
                                  const std::string& data_path,
                                  const std::string& truth_path);

void write_truth(const std::string& path, const QuadraticTruth& truth);
QuadraticTruth read_truth(const std::string& path);

struct DiffusionSpec {
    std::size_t nx = 0;
    std::size_t nt = 0;
    double length = 1.0;
    double kappa = 1.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::size_t single_mode = 0;  // 0: random smooth IC; k: pure sine mode k
};

/// Explicit finite-difference heat equation on nx interior points with
/// zero boundaries. Throws when kappa*dt/dx^2 exceeds the stability
/// bound 0.5.
Matrix make_diffusion(const DiffusionSpec& spec);

void generate_diffusion(const DiffusionSpec& spec, const std::string& data_path);

// Basis-aware ground-truth comparison. POD coordinates of the pipeline
// relate to latent coordinates by q = R (z - z_mean) with R = Vpod' V*
// and z_mean the training-window latent mean, so the truth operators
// must be shifted by z_mean and rotated by R before comparison.

/// M(G) with quad(G q) = M(G) quad(q), for square G.
Matrix quad_feature_change(const Matrix& g);

/// B(a) with quad(q + a) = quad(q) + B(a) q + quad(a).
Matrix quad_shift_linear(const std::vector<double>& a);

/// Mean of the first nt latent states (rows of truth.z).
std::vector<double> latent_training_mean(const QuadraticTruth& truth, std::size_t nt);

/// Ground-truth operators expressed in the pipeline's coordinates.
opinf::ReducedOperators truth_operators_in_pod(const QuadraticTruth& truth,
                                               const Matrix& r_change,
                                               const std::vector<double>& z_mean);

/// Latent trajectory mapped to the pipeline's coordinates: row k is
/// R (z_k - z_mean).
Matrix truth_trajectory_in_pod(const QuadraticTruth& truth, const Matrix& r_change,
                               const std::vector<double>& z_mean);

}  // namespace dopinf::synth
