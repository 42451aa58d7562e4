#include "dopinf/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "dopinf/artifacts.hpp"
#include "dopinf/data.hpp"
#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"
#include "dopinf/pod.hpp"
#include "dopinf/rom_search.hpp"
#include "dopinf/transform.hpp"

namespace dopinf::pipeline {

namespace {

const std::set<std::string> kKnownKeys = {
    "data",   "workers",    "backend", "energy",  "rank",   "scaling",
    "b1",     "b1_min",     "b1_max",  "b1_num",  "b2",     "b2_min",
    "b2_max", "b2_num",     "max_growth", "nt_p", "probes", "field",
    "out"};

std::vector<double> grid_axis(const config::Config& raw, const std::string& prefix,
                              double def_min, double def_max) {
    if (raw.has(prefix)) {
        std::vector<double> values;
        for (const std::string& item : raw.get_list(prefix)) {
            try {
                values.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("key '" + prefix + "': bad number '" + item + "'");
            }
        }
        if (values.empty()) throw ConfigError("key '" + prefix + "': empty list");
        for (double v : values) {
            if (!(v > 0.0)) throw ConfigError("key '" + prefix + "': values must be positive");
        }
        return values;
    }
    const double lo = raw.get_real(prefix + "_min", def_min);
    const double hi = raw.get_real(prefix + "_max", def_max);
    const long num = raw.get_int(prefix + "_num", 8);
    if (num < 1) throw ConfigError("key '" + prefix + "_num' must be at least 1");
    if (!(lo > 0.0) || !(hi > 0.0)) {
        throw ConfigError("keys '" + prefix + "_min/_max' must be positive");
    }
    return rom_search::logspace(lo, hi, static_cast<std::size_t>(num));
}

postprocess::ProbeSet parse_probes(const config::Config& raw) {
    postprocess::ProbeSet probes;
    if (!raw.has("probes")) return probes;
    for (const std::string& item : raw.get_list("probes")) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("key 'probes': expected var:index, got '" + item + "'");
        }
        try {
            const long var = std::stol(item.substr(0, colon));
            const long index = std::stol(item.substr(colon + 1));
            if (var < 0 || index < 0) throw std::invalid_argument(item);
            probes.push_back({static_cast<std::size_t>(var),
                              static_cast<std::size_t>(index)});
        } catch (const std::exception&) {
            throw ConfigError("key 'probes': bad entry '" + item + "'");
        }
    }
    return probes;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_reals(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_real(values[i]);
    }
    return out;
}

void check_probes(const postprocess::ProbeSet& probes,
                  const data::SnapshotHeader& header) {
    for (const postprocess::Probe& p : probes) {
        if (p.var >= header.n_vars) {
            throw ConfigError("probe variable " + std::to_string(p.var) +
                              " out of range (file has " +
                              std::to_string(header.n_vars) + " variables)");
        }
        if (p.index >= header.nx) {
            throw ConfigError("probe index " + std::to_string(p.index) +
                              " out of range (nx = " + std::to_string(header.nx) + ")");
        }
    }
}

std::size_t resolve_nt_p(const PipelineConfig& cfg, const data::SnapshotHeader& header) {
    const std::size_t nt_p = cfg.nt_p == 0 ? header.nt : cfg.nt_p;
    if (nt_p < header.nt) {
        throw ConfigError("nt_p = " + std::to_string(nt_p) +
                          " is shorter than the training horizon nt = " +
                          std::to_string(header.nt));
    }
    return nt_p;
}

void check_fixed_rank(const PipelineConfig& cfg, const data::SnapshotHeader& header) {
    if (cfg.fixed_rank > 0 &&
        static_cast<std::uint64_t>(cfg.fixed_rank) > header.nt) {
        throw ConfigError("rank = " + std::to_string(cfg.fixed_rank) +
                          " exceeds the snapshot count nt = " +
                          std::to_string(header.nt));
    }
}

std::string probe_file_name(const postprocess::Probe& p) {
    return "probe_v" + std::to_string(p.var) + "_g" + std::to_string(p.index) + ".bin";
}

int probe_owner(const data::PartitionPlan& plan, const postprocess::Probe& p) {
    for (std::size_t r = 0; r < plan.size(); ++r) {
        if (p.index >= plan[r].begin && p.index < plan[r].end) {
            return static_cast<int>(r);
        }
    }
    return -1;
}

Matrix row_vector(const std::vector<double>& v) {
    return Matrix(1, v.size(), v);
}

void write_resolved_config(const std::string& path, const PipelineConfig& cfg,
                           int workers) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataFormatError("cannot create resolved config: " + path);
    out << "data = " << cfg.data_path << '\n';
    out << "workers = " << workers << '\n';
    out << "backend = " << kernels::backend_name(kernels::active()) << '\n';
    if (cfg.fixed_rank > 0) {
        out << "rank = " << cfg.fixed_rank << '\n';
    } else {
        out << "energy = " << format_real(cfg.energy) << '\n';
    }
    out << "scaling = " << (cfg.scaling ? "on" : "off") << '\n';
    out << "b1 = " << join_reals(cfg.b1) << '\n';
    out << "b2 = " << join_reals(cfg.b2) << '\n';
    out << "max_growth = " << format_real(cfg.max_growth) << '\n';
    out << "nt_p = " << cfg.nt_p << '\n';
    if (!cfg.probes.empty()) {
        out << "probes = ";
        for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
            if (i) out << ",";
            out << cfg.probes[i].var << ':' << cfg.probes[i].index;
        }
        out << '\n';
    }
    out << "field = " << (cfg.write_field ? "on" : "off") << '\n';
    out << "out = " << cfg.out_dir << '\n';
}

void write_timings_csv(const std::string& path, const RunResult& result, int size) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataFormatError("cannot create timing file: " + path);
    out << "rank,stage,seconds\n";
    for (int rank = 0; rank < size; ++rank) {
        for (std::size_t s = 0; s < kStageCount; ++s) {
            out << rank << ',' << kStageNames[s] << ','
                << format_real(result.stage_seconds[static_cast<std::size_t>(rank) *
                                                    kStageCount + s])
                << '\n';
        }
    }
    out << result.owner_rank << ",rom_winner," << format_real(result.rom_seconds)
        << '\n';
}

}  // namespace

PipelineConfig load_config(const config::Config& raw,
                           std::vector<std::string>* warnings) {
    PipelineConfig cfg;
    cfg.data_path = raw.get_string("data", "");
    if (cfg.data_path.empty()) throw ConfigError("key 'data' is required");
    cfg.workers = static_cast<int>(raw.get_int("workers", 1));
    if (cfg.workers < 1) throw ConfigError("key 'workers' must be at least 1");
    cfg.kernels_backend = raw.get_string("backend", "auto");
    cfg.energy = raw.get_real("energy", 0.9995);
    if (!(cfg.energy > 0.0) || cfg.energy > 1.0) {
        throw ConfigError("key 'energy' must lie in (0, 1]");
    }
    cfg.fixed_rank = raw.get_int("rank", 0);
    if (cfg.fixed_rank < 0) throw ConfigError("key 'rank' must be positive");
    cfg.scaling = raw.get_flag("scaling", false);
    cfg.b1 = grid_axis(raw, "b1", 1e-10, 1e0);
    cfg.b2 = grid_axis(raw, "b2", 1e-4, 1e4);
    cfg.max_growth = raw.get_real("max_growth", 1.2);
    if (!(cfg.max_growth > 0.0)) throw ConfigError("key 'max_growth' must be positive");
    const long nt_p = raw.get_int("nt_p", 0);
    if (nt_p < 0) throw ConfigError("key 'nt_p' must be positive");
    cfg.nt_p = static_cast<std::size_t>(nt_p);
    cfg.probes = parse_probes(raw);
    cfg.write_field = raw.get_flag("field", true);
    cfg.out_dir = raw.get_string("out", ".");

    if (cfg.out_dir.empty()) cfg.out_dir = ".";

    if (warnings) {
        for (const auto& entry : raw.entries()) {
            if (!kKnownKeys.count(entry.first)) {
                warnings->push_back("ignoring unknown config key '" + entry.first + "'");
            }
        }
    }
    return cfg;
}

RunResult run_rank(const PipelineConfig& cfg, comm::Comm& comm) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;
    const int rank = comm.rank();
    const int size = comm.size();
    const fs::path out_dir(cfg.out_dir);
    // Every rank writes artifacts, so every rank must see the directory;
    // create_directories tolerates concurrent creation.
    fs::create_directories(out_dir);

    RunResult result;
    result.stage_seconds.assign(static_cast<std::size_t>(size) * kStageCount, 0.0);
    double* my_stages = result.stage_seconds.data() +
                        static_cast<std::size_t>(rank) * kStageCount;
    auto timed = [&my_stages](std::size_t stage, auto&& fn) {
        const auto t0 = clock::now();
        fn();
        my_stages[stage] += std::chrono::duration<double>(clock::now() - t0).count();
    };

    // Step I: header, partition, local block.
    data::SnapshotHeader header;
    data::PartitionPlan plan;
    data::LocalBlock block;
    timed(0, [&] {
        header = data::read_header(cfg.data_path);
        check_probes(cfg.probes, header);
        check_fixed_rank(cfg, header);
        plan = data::partition_rows(header.nx, size);
        block = data::read_block(cfg.data_path, plan, rank, header);
    });
    const std::size_t nt_p = resolve_nt_p(cfg, header);
    const std::size_t nx_i = block.row_range.count();
    result.n_vars = header.n_vars;
    result.nx = header.nx;
    result.nt = header.nt;
    result.nt_p = nt_p;

    // Step II: center, optionally scale.
    transform::TransformParams params;
    params.scaling_enabled = cfg.scaling;
    timed(1, [&] {
        params.local_means = transform::center_in_place(block);
        if (cfg.scaling) {
            params.scales = transform::compute_global_scales(block, header, comm);
            transform::scale_in_place(block, params.scales);
        }
    });

    // Step III: Gram reduction, then the replicated eigenpath.
    Matrix gram;
    timed(2, [&] { gram = pod::global_gram(pod::local_gram(block), comm); });

    pod::EigenSpectrum spectrum;
    Matrix tr;
    Matrix qhat;
    timed(3, [&] {
        spectrum = pod::eig_sym_desc(gram);
        if (cfg.fixed_rank > 0) {
            result.r = static_cast<std::size_t>(cfg.fixed_rank);
        } else {
            const pod::RankSelection sel =
                pod::select_rank(spectrum.eigenvalues, cfg.energy);
            result.r = sel.r;
            result.rank_capped = sel.capped;
        }
        result.retained = pod::retained_energy(spectrum.eigenvalues, result.r);
        tr = pod::reduced_map(spectrum, result.r);
        qhat = pod::project(tr, gram);
    });

    // Step IV: regularization search.
    rom_search::SearchConfig search{cfg.b1, cfg.b2, cfg.max_growth, nt_p};
    rom_search::SearchOutcome outcome;
    timed(4, [&] { outcome = rom_search::grid_search(qhat, search, comm); });
    result.pair_opt = outcome.pair_opt;
    result.train_err = outcome.train_err;
    result.owner_rank = outcome.owner_rank;
    result.rom_seconds = outcome.rom_seconds;

    // Step V: reconstructions and per-rank artifacts.
    timed(5, [&] {
        std::vector<artifacts::NamedMatrix> transform_blobs;
        transform_blobs.push_back({"means", row_vector(params.local_means)});
        if (cfg.scaling) {
            transform_blobs.push_back({"scales", row_vector(params.scales)});
        }
        transform_blobs.push_back(
            {"range", Matrix(1, 2, {static_cast<double>(block.row_range.begin),
                                    static_cast<double>(block.row_range.end)})});
        artifacts::write_blobs(
            (out_dir / ("transform_rank" + std::to_string(rank) + ".bin")).string(),
            transform_blobs);

        const auto series = postprocess::reconstruct_probes(
            block, tr, outcome.trajectory, cfg.probes, params);
        for (const auto& s : series) {
            artifacts::write_raw_vector((out_dir / probe_file_name(s.probe)).string(),
                                        s.values);
        }

        if (cfg.write_field) {
            const Matrix field =
                postprocess::reconstruct_field(block, tr, outcome.trajectory, params);
            data::SnapshotHeader field_header;
            field_header.n_vars = header.n_vars;
            field_header.nx = nx_i;
            field_header.nt = nt_p;
            field_header.var_names = header.var_names;
            std::vector<Matrix> field_vars;
            for (std::size_t j = 0; j < header.n_vars; ++j) {
                Matrix var(nx_i, nt_p);
                for (std::size_t i = 0; i < nx_i; ++i) {
                    for (std::size_t t = 0; t < nt_p; ++t) {
                        var(i, t) = field(j * nx_i + i, t);
                    }
                }
                field_vars.push_back(std::move(var));
            }
            data::write_snapshots(
                (out_dir / ("field_rank" + std::to_string(rank) + ".snp1")).string(),
                field_header, field_vars);
        }
    });

    // Whole-group timing table, identical everywhere after the reduction.
    comm.allreduce(result.stage_seconds, comm::ReduceOp::Sum);

    if (rank == 0) {
        artifacts::write_result((out_dir / "result.txt").string(), result.pair_opt,
                                result.r, result.train_err);

        const std::vector<double> gamma = opinf::build_regularizer(
            result.r, opinf::quad_len(result.r), result.pair_opt);
        const opinf::ReducedOperators ops =
            opinf::solve_opinf(opinf::assemble_data(qhat), gamma);
        artifacts::write_blobs((out_dir / "operators.bin").string(),
                               {{"A", ops.a}, {"F", ops.f}, {"c", row_vector(ops.c)}});
        artifacts::write_blobs((out_dir / "reduced_map.bin").string(), {{"Tr", tr}});
        artifacts::write_blobs((out_dir / "trajectory.bin").string(),
                               {{"Qtilde", outcome.trajectory}});

        std::ofstream probe_manifest((out_dir / "probes_manifest.txt").string(),
                                     std::ios::trunc);
        for (const postprocess::Probe& p : cfg.probes) {
            probe_manifest << "var=" << p.var << " index=" << p.index
                           << " owner=" << probe_owner(plan, p)
                           << " file=" << probe_file_name(p) << " steps=" << nt_p
                           << '\n';
        }

        if (cfg.write_field) {
            std::ofstream field_manifest((out_dir / "field_manifest.txt").string(),
                                         std::ios::trunc);
            for (int r = 0; r < size; ++r) {
                const data::RowRange range = plan[static_cast<std::size_t>(r)];
                field_manifest << "rank=" << r << " file=field_rank" << r
                               << ".snp1 rows=" << range.begin << ':' << range.end
                               << " vars=" << header.n_vars << " steps=" << nt_p
                               << '\n';
            }
        }

        PipelineConfig resolved = cfg;
        resolved.nt_p = nt_p;
        write_resolved_config((out_dir / "resolved.cfg").string(), resolved, size);
        write_timings_csv((out_dir / "timings.csv").string(), result, size);
    }
    return result;
}

RunResult run(const PipelineConfig& cfg) {
    if (!kernels::set_backend(cfg.kernels_backend)) {
        throw ConfigError("kernel backend '" + cfg.kernels_backend +
                          "' is not available on this machine");
    }
    RunResult shared;
    std::mutex mu;
    comm::run_on_workers(cfg.workers, [&](comm::Comm& comm) {
        RunResult mine = run_rank(cfg, comm);
        if (comm.rank() == 0) {
            std::lock_guard lock(mu);
            shared = std::move(mine);
        }
    });
    return shared;
}

void dry_run(const PipelineConfig& cfg, std::ostream& out) {
    const data::SnapshotHeader header = data::read_header(cfg.data_path);
    check_probes(cfg.probes, header);
    check_fixed_rank(cfg, header);
    const std::size_t nt_p = resolve_nt_p(cfg, header);
    const data::PartitionPlan plan = data::partition_rows(header.nx, cfg.workers);

    out << "data: " << cfg.data_path << " (" << header.n_vars << " variables, nx = "
        << header.nx << ", nt = " << header.nt << ")\n";
    out << "workers: " << cfg.workers << '\n';
    for (std::size_t r = 0; r < plan.size(); ++r) {
        out << "  rank " << r << ": rows [" << plan[r].begin << ", " << plan[r].end
            << ") -> " << header.n_vars * plan[r].count() << " local state rows\n";
    }
    out << "scaling: " << (cfg.scaling ? "on" : "off") << '\n';
    if (cfg.fixed_rank > 0) {
        const std::size_t r = static_cast<std::size_t>(cfg.fixed_rank);
        const std::size_t d = r + opinf::quad_len(r) + 1;
        out << "reduced dimension: r = " << r << " (fixed), d = " << d << '\n';
    } else {
        out << "reduced dimension: from retained energy > " << cfg.energy
            << "; d = r + r(r+1)/2 + 1 once r is selected\n";
    }
    out << "least-squares rows: K = " << header.nt - 1 << '\n';
    out << "grid: " << cfg.b1.size() << " x " << cfg.b2.size() << " = "
        << cfg.b1.size() * cfg.b2.size() << " candidate pairs, max_growth = "
        << cfg.max_growth << '\n';
    out << "trial horizon: nt_p = " << nt_p << '\n';
    out << "probes: " << cfg.probes.size() << " (validated)\n";
    out << "field output: " << (cfg.write_field ? "on" : "off") << '\n';
    out << "output dir: " << cfg.out_dir << " (nothing written in dry run)\n";
}

}  // namespace dopinf::pipeline
