#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "dopinf/comm.hpp"
#include "dopinf/data.hpp"
#include "dopinf/matrix.hpp"
#include "dopinf/opinf.hpp"

namespace dopinf::rom_search {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Candidate grid and admissibility settings. Defaults follow the
/// reference setup: 8 log-spaced values per axis, growth bound 1.2,
/// trial horizon equal to the target horizon.
struct SearchConfig {
    std::vector<double> b1;
    std::vector<double> b2;
    double max_growth = 1.2;
    std::size_t nt_p = 0;  // trajectory rows integrated per candidate
};

struct TrialResult {
    opinf::RegPair pair;
    double train_err = kInf;
    Matrix trajectory;  // nt_p x r, rows are time steps
    double growth = 0.0;
    double rom_seconds = 0.0;
    bool finite = false;
};

struct SearchOutcome {
    opinf::RegPair pair_opt;
    int owner_rank = -1;
    double train_err = kInf;
    Matrix trajectory;  // nt_p x r from the winning candidate
    double rom_seconds = 0.0;
};

/// n values spaced evenly in log10 between lo and hi (inclusive).
std::vector<double> logspace(double lo, double hi, std::size_t n);

std::vector<double> default_b1();  // 8 values, 1e-10 .. 1e0
std::vector<double> default_b2();  // 8 values, 1e-4 .. 1e4

/// One step of the discrete model: A q + F quad(q) + c.
std::vector<double> rom_step(const opinf::ReducedOperators& ops,
                             const std::vector<double>& q);

struct IntegrateResult {
    bool finite = false;  // false iff any entry is NaN or +-inf
    Matrix trajectory;    // n_steps x r, row 0 = qhat0
};

IntegrateResult integrate(const opinf::ReducedOperators& ops,
                          const std::vector<double>& qhat0, std::size_t n_steps);

/// Max over time rows of the row-relative l2 mismatch
/// sqrt(sum_j (tilde-ref)^2 / sum_j ref^2). Throws InvalidArgumentError
/// on a zero-norm reference row.
double training_error(const Matrix& qhat_ref, const Matrix& qtilde_train);

/// Deviation growth of the trial trajectory relative to training: with
/// mu the per-mode temporal mean of the training rows, the ratio of max
/// |trial - mu| to max |train - mu| over all modes and times.
double growth_ratio(const Matrix& qtilde, const Matrix& qhat_train);

/// Contiguous slice of candidate indices owned by `rank`; remainder to
/// the last rank as in partition_rows, except that size > n_reg is legal
/// here and leaves trailing ranks with empty slices.
data::RowRange distribute_pairs(std::size_t n_reg, int rank, int size);

/// Solve, integrate and score one candidate pair. `qhat_rows` is the
/// reduced training trajectory with rows as time (nt x r).
TrialResult evaluate_pair(const opinf::OpInfData& data, const Matrix& qhat_rows,
                          opinf::RegPair pair, const SearchConfig& config);

/// Admission rule: finite trajectory and growth strictly below the bound.
bool admissible(const TrialResult& trial, double max_growth);

/// Rank-distributed search over b1 x b2 (b1-major order). Every rank
/// returns the same outcome: globally minimal training error among
/// admissible candidates, ties resolved to the lowest candidate index.
/// Throws NoAdmissiblePairError when no candidate is admissible.
SearchOutcome grid_search(const Matrix& qhat, const SearchConfig& config,
                          comm::Comm& comm);

}  // namespace dopinf::rom_search
