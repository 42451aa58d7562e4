#include "dopinf/rom_search.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"
#include "dopinf/linalg.hpp"

namespace dopinf::rom_search {

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    if (n < 1) throw InvalidArgumentError("logspace: need at least one value");
    if (!(lo > 0.0) || !(hi > 0.0)) {
        throw InvalidArgumentError("logspace: bounds must be positive");
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = std::pow(10.0, a + static_cast<double>(k) * (b - a) /
                                    static_cast<double>(n - 1));
    }
    return out;
}

std::vector<double> default_b1() { return logspace(1e-10, 1e0, 8); }
std::vector<double> default_b2() { return logspace(1e-4, 1e4, 8); }

namespace {

// out = A q + F quad(q) + c, with a caller-provided feature buffer.
void rom_step_into(const opinf::ReducedOperators& ops, const double* q,
                   double* out, double* feat) {
    const std::size_t r = ops.a.rows();
    const std::size_t s = ops.f.cols();
    opinf::quad_features_into(q, r, feat);
    for (std::size_t i = 0; i < r; ++i) {
        out[i] = ops.c[i] + kernels::dot(ops.a.row(i), q, r) +
                 kernels::dot(ops.f.row(i), feat, s);
    }
}

}  // namespace

std::vector<double> rom_step(const opinf::ReducedOperators& ops,
                             const std::vector<double>& q) {
    if (q.size() != ops.a.rows()) {
        throw InvalidArgumentError("rom_step: state dimension mismatch");
    }
    std::vector<double> out(q.size());
    std::vector<double> feat(ops.f.cols());
    rom_step_into(ops, q.data(), out.data(), feat.data());
    return out;
}

IntegrateResult integrate(const opinf::ReducedOperators& ops,
                          const std::vector<double>& qhat0, std::size_t n_steps) {
    const std::size_t r = qhat0.size();
    if (n_steps < 1) throw InvalidArgumentError("integrate: need at least one step");
    if (r != ops.a.rows()) {
        throw InvalidArgumentError("integrate: state dimension mismatch");
    }
    IntegrateResult result;
    result.trajectory = Matrix(n_steps, r);
    for (std::size_t j = 0; j < r; ++j) result.trajectory(0, j) = qhat0[j];
    std::vector<double> feat(ops.f.cols());
    for (std::size_t k = 0; k + 1 < n_steps; ++k) {
        rom_step_into(ops, result.trajectory.row(k), result.trajectory.row(k + 1),
                      feat.data());
    }
    result.finite = true;
    for (double v : result.trajectory.flat()) {
        if (!std::isfinite(v)) {
            result.finite = false;
            break;
        }
    }
    return result;
}

double training_error(const Matrix& qhat_ref, const Matrix& qtilde_train) {
    if (qhat_ref.rows() != qtilde_train.rows() ||
        qhat_ref.cols() != qtilde_train.cols()) {
        throw InvalidArgumentError("training_error: shapes differ");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < qhat_ref.rows(); ++k) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < qhat_ref.cols(); ++j) {
            const double diff = qtilde_train(k, j) - qhat_ref(k, j);
            num += diff * diff;
            den += qhat_ref(k, j) * qhat_ref(k, j);
        }
        if (den == 0.0) {
            throw InvalidArgumentError("training_error: reference row " +
                                       std::to_string(k) + " has zero norm");
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    return worst;
}

double growth_ratio(const Matrix& qtilde, const Matrix& qhat_train) {
    if (qtilde.cols() != qhat_train.cols()) {
        throw InvalidArgumentError("growth_ratio: mode counts differ");
    }
    const std::size_t r = qhat_train.cols();
    const std::size_t nt = qhat_train.rows();
    double train_dev = 0.0;
    double trial_dev = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
        double mu = 0.0;
        for (std::size_t k = 0; k < nt; ++k) mu += qhat_train(k, j);
        mu /= static_cast<double>(nt);
        for (std::size_t k = 0; k < nt; ++k) {
            train_dev = std::max(train_dev, std::fabs(qhat_train(k, j) - mu));
        }
        for (std::size_t k = 0; k < qtilde.rows(); ++k) {
            trial_dev = std::max(trial_dev, std::fabs(qtilde(k, j) - mu));
        }
    }
    if (train_dev == 0.0) {
        throw InvalidArgumentError(
            "growth_ratio: training data is constant; deviation ratio undefined");
    }
    return trial_dev / train_dev;
}

data::RowRange distribute_pairs(std::size_t n_reg, int rank, int size) {
    if (n_reg < 1) throw InvalidArgumentError("distribute_pairs: no candidates");
    if (size < 1 || rank < 0 || rank >= size) {
        throw InvalidArgumentError("distribute_pairs: bad rank/size");
    }
    const std::size_t ranks = static_cast<std::size_t>(size);
    const std::size_t r = static_cast<std::size_t>(rank);
    if (ranks > n_reg) {
        if (r < n_reg) return {r, r + 1};
        return {n_reg, n_reg};
    }
    const std::size_t base = n_reg / ranks;
    return {r * base, (r + 1 == ranks) ? n_reg : (r + 1) * base};
}

TrialResult evaluate_pair(const opinf::OpInfData& data, const Matrix& qhat_rows,
                          opinf::RegPair pair, const SearchConfig& config) {
    const std::size_t r = data.qhat2t.cols();
    TrialResult trial;
    trial.pair = pair;

    const std::vector<double> gamma =
        opinf::build_regularizer(r, opinf::quad_len(r), pair);
    opinf::ReducedOperators ops = opinf::solve_opinf(data, gamma);

    std::vector<double> qhat0(qhat_rows.row(0), qhat_rows.row(0) + r);
    const auto t0 = std::chrono::steady_clock::now();
    IntegrateResult rom = integrate(ops, qhat0, config.nt_p);
    const auto t1 = std::chrono::steady_clock::now();
    trial.rom_seconds = std::chrono::duration<double>(t1 - t0).count();
    trial.finite = rom.finite;
    trial.trajectory = std::move(rom.trajectory);
    if (!trial.finite) return trial;

    Matrix tilde_train(qhat_rows.rows(), r);
    for (std::size_t k = 0; k < tilde_train.rows(); ++k) {
        for (std::size_t j = 0; j < r; ++j) {
            tilde_train(k, j) = trial.trajectory(k, j);
        }
    }
    trial.train_err = training_error(qhat_rows, tilde_train);
    trial.growth = growth_ratio(trial.trajectory, qhat_rows);
    return trial;
}

bool admissible(const TrialResult& trial, double max_growth) {
    return trial.finite && trial.growth < max_growth;
}

SearchOutcome grid_search(const Matrix& qhat, const SearchConfig& config,
                          comm::Comm& comm) {
    const std::size_t nt = qhat.cols();
    if (config.b1.empty() || config.b2.empty()) {
        throw InvalidArgumentError("grid_search: empty candidate grid");
    }
    for (double b : config.b1) {
        if (!(b > 0.0)) throw InvalidArgumentError("grid_search: b1 candidates must be positive");
    }
    for (double b : config.b2) {
        if (!(b > 0.0)) throw InvalidArgumentError("grid_search: b2 candidates must be positive");
    }
    if (!(config.max_growth > 0.0)) {
        throw InvalidArgumentError("grid_search: max_growth must be positive");
    }
    if (config.nt_p < nt) {
        throw InvalidArgumentError("grid_search: trial horizon shorter than training");
    }

    const opinf::OpInfData data = opinf::assemble_data(qhat);
    const Matrix qhat_rows = linalg::transpose(qhat);
    const std::size_t n_reg = config.b1.size() * config.b2.size();
    const data::RowRange mine = distribute_pairs(n_reg, comm.rank(), comm.size());

    TrialResult best;
    double best_err = kInf;
    double n_diverged = 0.0;
    double n_growth = 0.0;
    for (std::size_t idx = mine.begin; idx < mine.end; ++idx) {
        const opinf::RegPair pair{config.b1[idx / config.b2.size()],
                                  config.b2[idx % config.b2.size()]};
        TrialResult trial = evaluate_pair(data, qhat_rows, pair, config);
        if (!trial.finite) n_diverged += 1.0;
        else if (!admissible(trial, config.max_growth)) n_growth += 1.0;
        const double score = admissible(trial, config.max_growth) ? trial.train_err : kInf;
        if (score < best_err) {
            best_err = score;
            best = std::move(trial);
        }
    }

    const double global_min = comm::allreduce_scalar(comm, best_err, comm::ReduceOp::Min);
    if (global_min == kInf) {
        n_diverged = comm::allreduce_scalar(comm, n_diverged, comm::ReduceOp::Sum);
        n_growth = comm::allreduce_scalar(comm, n_growth, comm::ReduceOp::Sum);
        throw NoAdmissiblePairError(
            "no admissible regularization pair among " + std::to_string(n_reg) +
            " candidates (" + std::to_string(static_cast<long>(n_diverged)) +
            " diverged, " + std::to_string(static_cast<long>(n_growth)) +
            " exceeded growth bound " + std::to_string(config.max_growth) + ")");
    }

    const double my_claim = (best_err == global_min)
                                ? static_cast<double>(comm.rank())
                                : static_cast<double>(comm.size());
    const int owner = static_cast<int>(
        comm::allreduce_scalar(comm, my_claim, comm::ReduceOp::Min));

    SearchOutcome outcome;
    outcome.owner_rank = owner;
    outcome.train_err = global_min;
    // Winner metadata plus trajectory travel in one broadcast buffer.
    const std::size_t r = qhat.rows();
    std::vector<double> packet(3 + config.nt_p * r, 0.0);
    if (comm.rank() == owner) {
        packet[0] = best.pair.beta1;
        packet[1] = best.pair.beta2;
        packet[2] = best.rom_seconds;
        std::copy(best.trajectory.flat().begin(), best.trajectory.flat().end(),
                  packet.begin() + 3);
    }
    comm.broadcast(packet, owner);
    outcome.pair_opt = {packet[0], packet[1]};
    outcome.rom_seconds = packet[2];
    outcome.trajectory = Matrix(
        config.nt_p, r, std::vector<double>(packet.begin() + 3, packet.end()));
    return outcome;
}

}  // namespace dopinf::rom_search
