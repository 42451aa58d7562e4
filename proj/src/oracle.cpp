#include "dopinf/oracle.hpp"

#include <cmath>
#include <mutex>
#include <ostream>

#include "dopinf/comm.hpp"
#include "dopinf/errors.hpp"
#include "dopinf/linalg.hpp"
#include "dopinf/opinf.hpp"
#include "dopinf/pod.hpp"
#include "dopinf/synth.hpp"

namespace dopinf::oracle {

Matrix stacked_transformed(const std::string& data_path, bool scaling,
                           data::SnapshotHeader* header_out,
                           transform::TransformParams* params_out) {
    const data::SnapshotHeader header = data::read_header(data_path);
    const data::PartitionPlan plan = data::partition_rows(header.nx, 1);
    data::LocalBlock block = data::read_block(data_path, plan, 0, header);

    transform::TransformParams params;
    params.scaling_enabled = scaling;
    params.local_means = transform::center_in_place(block);
    if (scaling) {
        comm::run_on_workers(1, [&](comm::Comm& comm) {
            params.scales = transform::compute_global_scales(block, header, comm);
        });
        transform::scale_in_place(block, params.scales);
    }
    if (header_out) *header_out = header;
    if (params_out) *params_out = params;
    return std::move(block.values);
}

SerialReduction svd_reduce(const Matrix& q, std::size_t r) {
    const linalg::ThinSvd svd = linalg::thin_svd(q);
    if (r < 1 || r > svd.sigma.size()) {
        throw InvalidArgumentError("svd_reduce: r outside [1, min(m, nt)]");
    }
    SerialReduction out;
    out.singular_values = svd.sigma;
    out.vr = Matrix(q.rows(), r);
    for (std::size_t i = 0; i < q.rows(); ++i) {
        for (std::size_t k = 0; k < r; ++k) {
            out.vr(i, k) = svd.u(i, k);
        }
    }
    out.qhat = linalg::matmul_tn(out.vr, q);
    return out;
}

namespace {

struct GramRoute {
    std::vector<double> eigenvalues;
    std::size_t r = 0;
    Matrix tr;
    Matrix qhat;
    Matrix gram;
};

// Distributed reduction of a dataset on p in-process ranks; rank 0's
// (replicated) results are returned.
GramRoute gram_reduce_distributed(const std::string& data_path, bool scaling,
                                  int workers, double energy, long fixed_rank) {
    GramRoute out;
    std::mutex mu;
    comm::run_on_workers(workers, [&](comm::Comm& comm) {
        const data::SnapshotHeader header = data::read_header(data_path);
        const data::PartitionPlan plan =
            data::partition_rows(header.nx, comm.size());
        data::LocalBlock block =
            data::read_block(data_path, plan, comm.rank(), header);
        transform::center_in_place(block);
        if (scaling) {
            const auto scales =
                transform::compute_global_scales(block, header, comm);
            transform::scale_in_place(block, scales);
        }
        Matrix gram = pod::global_gram(pod::local_gram(block), comm);
        const pod::EigenSpectrum spectrum = pod::eig_sym_desc(gram);
        const std::size_t r =
            fixed_rank > 0 ? static_cast<std::size_t>(fixed_rank)
                           : pod::select_rank(spectrum.eigenvalues, energy).r;
        Matrix tr = pod::reduced_map(spectrum, r);
        Matrix qhat = pod::project(tr, gram);
        if (comm.rank() == 0) {
            std::lock_guard lock(mu);
            out.eigenvalues = spectrum.eigenvalues;
            out.r = r;
            out.tr = std::move(tr);
            out.qhat = std::move(qhat);
            out.gram = std::move(gram);
        }
    });
    return out;
}

// Largest elementwise gap between two row sets that are only defined up
// to a per-row sign.
double sign_folded_gap(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double direct = 0.0;
        double flipped = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            direct = std::max(direct, std::fabs(a(i, j) - b(i, j)));
            flipped = std::max(flipped, std::fabs(a(i, j) + b(i, j)));
        }
        worst = std::max(worst, std::min(direct, flipped));
    }
    return worst;
}

double max_abs_gap(const Matrix& a, const Matrix& b) {
    return linalg::max_abs_diff(a, b);
}

bool report(std::ostream& out, const std::string& name, bool ok, double metric,
            double bound) {
    out << (ok ? "PASS" : "FAIL") << "  " << name << "  (metric " << metric
        << ", bound " << bound << ")\n";
    return ok;
}

}  // namespace

bool verify_dataset(const std::string& data_path, const VerifyOptions& opts,
                    std::ostream& out) {
    bool all_ok = true;

    data::SnapshotHeader header;
    const Matrix q = stacked_transformed(data_path, opts.scaling, &header);
    const GramRoute serial_gram = gram_reduce_distributed(
        data_path, opts.scaling, 1, opts.energy, opts.fixed_rank);
    const std::size_t r = serial_gram.r;
    const SerialReduction svd = svd_reduce(q, r);
    const double sigma1 = svd.singular_values.empty() ? 0.0 : svd.singular_values[0];

    out << "dataset: " << data_path << " (" << header.n_vars << " variables, nx = "
        << header.nx << ", nt = " << header.nt << "), reduced dimension r = " << r
        << "\n";

    // Spectrum agreement between the two routes (squared singular values
    // against Gram eigenvalues).
    {
        double worst = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
            worst = std::max(worst, std::fabs(serial_gram.eigenvalues[k] -
                                              svd.singular_values[k] *
                                                  svd.singular_values[k]));
        }
        const double bound = 1e-8 * sigma1 * sigma1;
        all_ok &= report(out, "Gram eigenvalues equal squared singular values",
                         worst <= bound, worst, bound);
    }

    // Distributed projection vs the direct SVD projection, per p.
    for (int workers : opts.worker_counts) {
        const std::string name = "projection matches serial SVD (workers = " +
                                 std::to_string(workers) + ")";
        if (workers < 1 || static_cast<std::uint64_t>(workers) > header.nx) {
            out << "SKIP  " << name << "  (more workers than rows)\n";
            continue;
        }
        const GramRoute route = gram_reduce_distributed(
            data_path, opts.scaling, workers, opts.energy, opts.fixed_rank);
        if (route.r != r) {
            out << "FAIL  " << name << "  (selected r " << route.r
                << " differs from serial " << r << ")\n";
            all_ok = false;
            continue;
        }
        const double gap = sign_folded_gap(route.qhat, svd.qhat);
        const double bound = 1e-8 * sigma1;
        all_ok &= report(out, name, gap <= bound, gap, bound);
    }

    // Algebraic identities on the Gram route.
    {
        const Matrix tdt = linalg::matmul_tn(
            serial_gram.tr, linalg::matmul(serial_gram.gram, serial_gram.tr));
        Matrix identity(r, r);
        for (std::size_t i = 0; i < r; ++i) identity(i, i) = 1.0;
        const double gap = max_abs_gap(tdt, identity);
        all_ok &= report(out, "Tr' D Tr equals the identity", gap <= 1e-8, gap, 1e-8);
    }
    {
        const Matrix qq = linalg::matmul_nt(serial_gram.qhat, serial_gram.qhat);
        Matrix lambda(r, r);
        for (std::size_t i = 0; i < r; ++i) lambda(i, i) = serial_gram.eigenvalues[i];
        const double gap = max_abs_gap(qq, lambda) /
                           (serial_gram.eigenvalues[0] > 0.0
                                ? serial_gram.eigenvalues[0]
                                : 1.0);
        all_ok &= report(out, "Qhat Qhat' equals the leading eigenvalues",
                         gap <= 1e-8, gap, 1e-8);
    }

    // Truncation energy: squared residual of the rank-r reconstruction
    // equals the discarded eigenvalue tail.
    {
        double total = 0.0;
        double tail = 0.0;
        for (std::size_t k = 0; k < serial_gram.eigenvalues.size(); ++k) {
            total += serial_gram.eigenvalues[k];
            if (k >= r) tail += serial_gram.eigenvalues[k];
        }
        const Matrix vr_full = linalg::matmul(q, serial_gram.tr);
        const Matrix approx = linalg::matmul(vr_full, serial_gram.qhat);
        double residual_sq = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double diff = q.data()[i] - approx.data()[i];
            residual_sq += diff * diff;
        }
        const bool tiny_tail = tail <= 1e-12 * total;
        const double metric = tiny_tail ? residual_sq
                                        : std::fabs(residual_sq - tail) / tail;
        const double bound = tiny_tail ? 1e-8 * total : 1e-6;
        all_ok &= report(out, "reconstruction residual equals the eigenvalue tail",
                         metric <= bound, metric, bound);
    }

    // Ground-truth comparison when a truth file accompanies the dataset.
    if (!opts.truth_path.empty()) {
        const synth::QuadraticTruth truth = synth::read_truth(opts.truth_path);
        const std::size_t r_true = truth.ops.a.rows();
        if (r != r_true) {
            out << "FAIL  intrinsic dimension recovered  (selected r " << r
                << ", truth has " << r_true << ")\n";
            all_ok = false;
        } else {
            const Matrix vr_full = linalg::matmul(q, serial_gram.tr);
            const Matrix r_change = linalg::matmul_tn(vr_full, truth.v);
            const std::vector<double> z_mean =
                synth::latent_training_mean(truth, header.nt);

            Matrix rrt = linalg::matmul_nt(r_change, r_change);
            for (std::size_t i = 0; i < r; ++i) rrt(i, i) -= 1.0;
            double ortho_gap = 0.0;
            for (double v : rrt.flat()) ortho_gap = std::max(ortho_gap, std::fabs(v));
            all_ok &= report(out, "basis change is orthogonal", ortho_gap <= 1e-8,
                             ortho_gap, 1e-8);

            const opinf::RegPair tiny{1e-12, 1e-12};
            const opinf::OpInfData lsq = opinf::assemble_data(serial_gram.qhat);
            const opinf::ReducedOperators learned = opinf::solve_opinf(
                lsq, opinf::build_regularizer(r, opinf::quad_len(r), tiny));
            const opinf::ReducedOperators expected =
                synth::truth_operators_in_pod(truth, r_change, z_mean);

            double gap = max_abs_gap(learned.a, expected.a);
            gap = std::max(gap, max_abs_gap(learned.f, expected.f));
            for (std::size_t i = 0; i < r; ++i) {
                gap = std::max(gap, std::fabs(learned.c[i] - expected.c[i]));
            }
            all_ok &= report(out, "ground-truth operators recovered", gap <= 1e-6,
                             gap, 1e-6);

            const Matrix truth_traj =
                synth::truth_trajectory_in_pod(truth, r_change, z_mean);
            double num = 0.0;
            double den = 0.0;
            for (std::size_t k = 0; k < header.nt; ++k) {
                for (std::size_t j = 0; j < r; ++j) {
                    const double diff = truth_traj(k, j) - serial_gram.qhat(j, k);
                    num += diff * diff;
                    den += truth_traj(k, j) * truth_traj(k, j);
                }
            }
            const double traj_gap = std::sqrt(num / den);
            all_ok &= report(out, "projected truth trajectory matches",
                             traj_gap <= 1e-8, traj_gap, 1e-8);
        }
    }

    out << (all_ok ? "verification passed" : "verification FAILED") << "\n";
    return all_ok;
}

}  // namespace dopinf::oracle
