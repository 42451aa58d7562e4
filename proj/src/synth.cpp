#include "dopinf/synth.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"
#include "dopinf/linalg.hpp"

namespace dopinf::synth {

double Rng::uniform() {
    // 53 high bits -> [0, 1), independent of library distribution details.
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

Matrix random_orthonormal(std::size_t m, std::size_t r, Rng& rng) {
    if (r > m) {
        throw InvalidArgumentError("random_orthonormal: more columns than rows");
    }
    Matrix v(m, r);
    for (std::size_t j = 0; j < r; ++j) {
        for (int attempt = 0; attempt < 10; ++attempt) {
            for (std::size_t i = 0; i < m; ++i) v(i, j) = rng.normal();
            // Two Gram-Schmidt sweeps keep the columns orthonormal to
            // round-off even for ill-conditioned draws.
            for (int sweep = 0; sweep < 2; ++sweep) {
                for (std::size_t k = 0; k < j; ++k) {
                    double proj = 0.0;
                    for (std::size_t i = 0; i < m; ++i) proj += v(i, k) * v(i, j);
                    for (std::size_t i = 0; i < m; ++i) v(i, j) -= proj * v(i, k);
                }
            }
            double norm = 0.0;
            for (std::size_t i = 0; i < m; ++i) norm += v(i, j) * v(i, j);
            norm = std::sqrt(norm);
            if (norm > 1e-13) {
                for (std::size_t i = 0; i < m; ++i) v(i, j) /= norm;
                break;
            }
        }
    }
    return v;
}

Matrix random_orthonormal(std::size_t m, std::size_t r, std::uint64_t seed) {
    Rng rng(seed);
    return random_orthonormal(m, r, rng);
}

namespace {

// Latent linear part: orthogonal similarity of a block-rotation matrix,
// moduli just under 1 so trajectories decay slowly but stay bounded.
Matrix draw_latent_linear(std::size_t r, Rng& rng) {
    Matrix b(r, r);
    for (std::size_t k = 0; 2 * k + 1 < r; ++k) {
        const double rho = rng.uniform(0.99, 0.999);
        const double theta = rng.uniform(0.3, 1.2);
        const double c = rho * std::cos(theta);
        const double s = rho * std::sin(theta);
        b(2 * k, 2 * k) = c;
        b(2 * k, 2 * k + 1) = -s;
        b(2 * k + 1, 2 * k) = s;
        b(2 * k + 1, 2 * k + 1) = c;
    }
    if (r % 2 == 1) b(r - 1, r - 1) = rng.uniform(0.99, 0.999);
    const Matrix o = random_orthonormal(r, r, rng);
    return linalg::matmul(linalg::matmul(o, b), linalg::transpose(o));
}

// Integrate the latent model; false when any state leaves |z| < 100 or
// goes non-finite (the draw is then rejected).
bool integrate_latent(const opinf::ReducedOperators& ops,
                      const std::vector<double>& z0, std::size_t n_steps,
                      Matrix& out) {
    const std::size_t r = z0.size();
    out = Matrix(n_steps, r);
    for (std::size_t j = 0; j < r; ++j) out(0, j) = z0[j];
    std::vector<double> feat(ops.f.cols());
    for (std::size_t k = 0; k + 1 < n_steps; ++k) {
        const double* z = out.row(k);
        double* next = out.row(k + 1);
        opinf::quad_features_into(z, r, feat.data());
        for (std::size_t i = 0; i < r; ++i) {
            next[i] = ops.c[i] + kernels::dot(ops.a.row(i), z, r) +
                      kernels::dot(ops.f.row(i), feat.data(), feat.size());
            if (!std::isfinite(next[i]) || std::fabs(next[i]) >= 100.0) {
                return false;
            }
        }
    }
    return true;
}

constexpr char kTruthMagic[4] = {'S', 'N', 'T', '1'};

void write_doubles(std::ostream& out, const double* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* p, std::size_t n, const char* what) {
    if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)))) {
        throw DataFormatError(std::string("truth file truncated in ") + what);
    }
}

}  // namespace

QuadraticData make_quadratic(const QuadraticSpec& spec) {
    const std::size_t n = spec.n_vars * spec.nx;
    const std::size_t r = spec.r_true;
    if (spec.n_vars < 1 || spec.nx < 1 || r < 1 || r > n) {
        throw InvalidArgumentError("make_quadratic: need 1 <= r_true <= n_vars * nx");
    }
    if (spec.nt < 2 || spec.nt_p < spec.nt) {
        throw InvalidArgumentError("make_quadratic: need nt >= 2 and nt_p >= nt");
    }
    if (r > spec.nt - 1) {
        throw InvalidArgumentError("make_quadratic: r_true must be at most nt - 1");
    }

    Rng rng(spec.seed);
    const std::size_t s = opinf::quad_len(r);

    QuadraticData out;
    bool accepted = false;
    for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
        opinf::ReducedOperators ops;
        ops.a = draw_latent_linear(r, rng);
        ops.f = Matrix(r, s);
        for (double& v : ops.f.flat()) v = 0.02 * rng.normal();
        ops.c.resize(r);
        for (double& v : ops.c) v = 0.02 * rng.normal();

        std::vector<double> z0(r);
        double norm = 0.0;
        for (double& v : z0) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : z0) v /= norm;

        Matrix z;
        if (integrate_latent(ops, z0, spec.nt_p, z)) {
            out.truth.ops = std::move(ops);
            out.truth.z = std::move(z);
            accepted = true;
        }
    }
    if (!accepted) {
        throw InvalidArgumentError(
            "make_quadratic: no bounded trajectory found in 100 draws; "
            "the requested system size is persistently divergent");
    }

    out.truth.v = random_orthonormal(n, r, rng);
    out.truth.mu.resize(n);
    for (double& v : out.truth.mu) v = rng.normal();

    out.header.n_vars = spec.n_vars;
    out.header.nx = spec.nx;
    out.header.nt = spec.nt;
    for (std::size_t j = 0; j < spec.n_vars; ++j) {
        out.header.var_names.push_back("var" + std::to_string(j));
    }
    out.variables.assign(spec.n_vars, Matrix(spec.nx, spec.nt));
    for (std::size_t j = 0; j < spec.n_vars; ++j) {
        Matrix& var = out.variables[j];
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const double* v_row = out.truth.v.row(j * spec.nx + i);
            const double mean = out.truth.mu[j * spec.nx + i];
            for (std::size_t k = 0; k < spec.nt; ++k) {
                var(i, k) = kernels::dot(v_row, out.truth.z.row(k), r) + mean;
            }
        }
    }
    return out;
}

QuadraticTruth generate_quadratic(const QuadraticSpec& spec,
                                  const std::string& data_path,
                                  const std::string& truth_path) {
    QuadraticData made = make_quadratic(spec);
    data::write_snapshots(data_path, made.header, made.variables);
    write_truth(truth_path, made.truth);
    return std::move(made.truth);
}

void write_truth(const std::string& path, const QuadraticTruth& truth) {
    const std::size_t r = truth.ops.a.rows();
    const std::size_t n = truth.v.rows();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataFormatError("cannot create truth file: " + path);
    out.write(kTruthMagic, sizeof kTruthMagic);
    const std::uint64_t dims[3] = {r, n, truth.z.rows()};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    write_doubles(out, truth.ops.a.data(), truth.ops.a.size());
    write_doubles(out, truth.ops.f.data(), truth.ops.f.size());
    write_doubles(out, truth.ops.c.data(), truth.ops.c.size());
    write_doubles(out, truth.v.data(), truth.v.size());
    write_doubles(out, truth.mu.data(), truth.mu.size());
    write_doubles(out, truth.z.data(), truth.z.size());
    if (!out) throw DataFormatError("write failed: " + path);
}

QuadraticTruth read_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("cannot open truth file: " + path);
    char magic[4] = {};
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kTruthMagic, 4) != 0) {
        throw DataFormatError("not a truth file (bad magic): " + path);
    }
    std::uint64_t dims[3] = {};
    if (!in.read(reinterpret_cast<char*>(dims), sizeof dims)) {
        throw DataFormatError("truth file truncated in header: " + path);
    }
    const std::size_t r = dims[0];
    const std::size_t n = dims[1];
    const std::size_t nt_p = dims[2];
    const std::size_t s = opinf::quad_len(r);

    QuadraticTruth truth;
    truth.ops.a = Matrix(r, r);
    truth.ops.f = Matrix(r, s);
    truth.ops.c.resize(r);
    truth.v = Matrix(n, r);
    truth.mu.resize(n);
    truth.z = Matrix(nt_p, r);
    read_doubles(in, truth.ops.a.data(), truth.ops.a.size(), "linear operator");
    read_doubles(in, truth.ops.f.data(), truth.ops.f.size(), "quadratic operator");
    read_doubles(in, truth.ops.c.data(), truth.ops.c.size(), "constant operator");
    read_doubles(in, truth.v.data(), truth.v.size(), "embedding");
    read_doubles(in, truth.mu.data(), truth.mu.size(), "offset");
    read_doubles(in, truth.z.data(), truth.z.size(), "latent trajectory");
    return truth;
}

Matrix make_diffusion(const DiffusionSpec& spec) {
    if (spec.nx < 1 || spec.nt < 2) {
        throw InvalidArgumentError("make_diffusion: need nx >= 1 and nt >= 2");
    }
    if (!(spec.length > 0.0) || !(spec.kappa > 0.0) || !(spec.dt > 0.0)) {
        throw InvalidArgumentError("make_diffusion: length, kappa, dt must be positive");
    }
    const double dx = spec.length / static_cast<double>(spec.nx + 1);
    const double alpha = spec.kappa * spec.dt / (dx * dx);
    if (alpha > 0.5) {
        throw InvalidArgumentError(
            "make_diffusion: kappa*dt/dx^2 = " + std::to_string(alpha) +
            " violates the explicit stability bound 0.5");
    }

    std::vector<double> u(spec.nx, 0.0);
    if (spec.single_mode > 0) {
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const double x = static_cast<double>(i + 1) * dx;
            u[i] = std::sin(static_cast<double>(spec.single_mode) *
                            std::numbers::pi * x / spec.length);
        }
    } else {
        Rng rng(spec.seed);
        const std::size_t modes = std::min<std::size_t>(spec.nx, 20);
        for (std::size_t k = 1; k <= modes; ++k) {
            const double coef = rng.normal() / static_cast<double>(k * k);
            for (std::size_t i = 0; i < spec.nx; ++i) {
                const double x = static_cast<double>(i + 1) * dx;
                u[i] += coef * std::sin(static_cast<double>(k) * std::numbers::pi *
                                        x / spec.length);
            }
        }
    }

    Matrix snapshots(spec.nx, spec.nt);
    std::vector<double> next(spec.nx, 0.0);
    for (std::size_t k = 0; k < spec.nt; ++k) {
        for (std::size_t i = 0; i < spec.nx; ++i) snapshots(i, k) = u[i];
        if (k + 1 == spec.nt) break;
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const double left = (i == 0) ? 0.0 : u[i - 1];
            const double right = (i + 1 == spec.nx) ? 0.0 : u[i + 1];
            next[i] = u[i] + alpha * (right - 2.0 * u[i] + left);
        }
        u.swap(next);
    }
    return snapshots;
}

void generate_diffusion(const DiffusionSpec& spec, const std::string& data_path) {
    data::SnapshotHeader header;
    header.n_vars = 1;
    header.nx = spec.nx;
    header.nt = spec.nt;
    header.var_names = {"u"};
    data::write_snapshots(data_path, header, {make_diffusion(spec)});
}

Matrix quad_feature_change(const Matrix& g) {
    if (g.rows() != g.cols()) {
        throw InvalidArgumentError("quad_feature_change: matrix must be square");
    }
    const std::size_t r = g.rows();
    const std::size_t s = opinf::quad_len(r);
    Matrix m(s, s);
    std::size_t row = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i; j < r; ++j, ++row) {
            std::size_t col = 0;
            for (std::size_t a = 0; a < r; ++a) {
                for (std::size_t b = a; b < r; ++b, ++col) {
                    m(row, col) = (a == b) ? g(i, a) * g(j, a)
                                           : g(i, a) * g(j, b) + g(i, b) * g(j, a);
                }
            }
        }
    }
    return m;
}

Matrix quad_shift_linear(const std::vector<double>& a) {
    const std::size_t r = a.size();
    Matrix b(opinf::quad_len(r), r);
    std::size_t row = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = i; j < r; ++j, ++row) {
            b(row, j) += a[i];
            b(row, i) += a[j];
        }
    }
    return b;
}

std::vector<double> latent_training_mean(const QuadraticTruth& truth, std::size_t nt) {
    if (nt < 1 || nt > truth.z.rows()) {
        throw InvalidArgumentError("latent_training_mean: nt outside the trajectory");
    }
    const std::size_t r = truth.z.cols();
    std::vector<double> mean(r, 0.0);
    for (std::size_t k = 0; k < nt; ++k) {
        kernels::add(mean.data(), truth.z.row(k), r);
    }
    kernels::div_scalar(mean.data(), r, static_cast<double>(nt));
    return mean;
}

opinf::ReducedOperators truth_operators_in_pod(const QuadraticTruth& truth,
                                               const Matrix& r_change,
                                               const std::vector<double>& z_mean) {
    const Matrix& a = truth.ops.a;
    const Matrix& f = truth.ops.f;

    // Re-center the latent model at the training mean: in w = z - z_mean
    // coordinates the quadratic operator is unchanged while the linear
    // and constant parts absorb the shift.
    const Matrix a_shift = linalg::matmul(f, quad_shift_linear(z_mean));
    Matrix a_centered = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        kernels::add(a_centered.row(i), a_shift.row(i), a.cols());
    }
    std::vector<double> c_centered = linalg::matvec(a, z_mean);
    const std::vector<double> fq = linalg::matvec(f, opinf::quad_nonredundant(z_mean));
    for (std::size_t i = 0; i < c_centered.size(); ++i) {
        c_centered[i] += fq[i] + truth.ops.c[i] - z_mean[i];
    }

    // Rotate into the pipeline's coordinates with R = Vpod' V*.
    opinf::ReducedOperators out;
    out.a = linalg::matmul_nt(linalg::matmul(r_change, a_centered), r_change);
    out.f = linalg::matmul(linalg::matmul(r_change, f),
                           quad_feature_change(linalg::transpose(r_change)));
    out.c = linalg::matvec(r_change, c_centered);
    return out;
}

Matrix truth_trajectory_in_pod(const QuadraticTruth& truth, const Matrix& r_change,
                               const std::vector<double>& z_mean) {
    const std::size_t r = truth.z.cols();
    Matrix out(truth.z.rows(), r_change.rows());
    std::vector<double> w(r);
    for (std::size_t k = 0; k < truth.z.rows(); ++k) {
        for (std::size_t j = 0; j < r; ++j) w[j] = truth.z(k, j) - z_mean[j];
        for (std::size_t i = 0; i < r_change.rows(); ++i) {
            out(k, i) = kernels::dot(r_change.row(i), w.data(), r);
        }
    }
    return out;
}

}  // namespace dopinf::synth
