// Command-line front end: dataset generation, training runs, standalone
// probe extraction, timing reports and dataset verification.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dopinf/artifacts.hpp"
#include "dopinf/comm.hpp"
#include "dopinf/config.hpp"
#include "dopinf/data.hpp"
#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"
#include "dopinf/oracle.hpp"
#include "dopinf/pipeline.hpp"
#include "dopinf/postprocess.hpp"
#include "dopinf/synth.hpp"
#include "dopinf/transform.hpp"

#if defined(DOPINF_HAVE_MPI)
#include <mpi.h>
#endif

namespace {

namespace fs = std::filesystem;
using namespace dopinf;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void print_train_summary(const pipeline::RunResult& res,
                         const pipeline::PipelineConfig& cfg) {
    std::cout << "reduced dimension r = " << res.r << " (retained energy "
              << fmt(res.retained) << ")";
    if (res.rank_capped) std::cout << "  [energy target never reached]";
    std::cout << "\noptimal pair: beta1 = " << fmt(res.pair_opt.beta1)
              << ", beta2 = " << fmt(res.pair_opt.beta2) << " (found by rank "
              << res.owner_rank << ")\n";
    std::cout << "training error = " << fmt(res.train_err)
              << ", winning rom integration " << fmt(res.rom_seconds) << " s\n";

    const int size = static_cast<int>(res.stage_seconds.size() / pipeline::kStageCount);
    std::cout << "stage seconds (mean over " << size << " rank" << (size == 1 ? "" : "s")
              << "):";
    for (std::size_t s = 0; s < pipeline::kStageCount; ++s) {
        double sum = 0.0;
        for (int rank = 0; rank < size; ++rank) {
            sum += res.stage_seconds[static_cast<std::size_t>(rank) *
                                     pipeline::kStageCount + s];
        }
        std::cout << ' ' << pipeline::kStageNames[s] << ' ' << fmt(sum / size);
    }
    std::cout << "\nartifacts written to " << cfg.out_dir << "\n";
}

pipeline::PipelineConfig load_train_config(const std::string& path, int workers,
                                           const std::string& backend) {
    std::vector<std::string> warnings;
    pipeline::PipelineConfig cfg =
        pipeline::load_config(config::Config::parse_file(path), &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    if (workers > 0) cfg.workers = workers;
    if (!backend.empty()) cfg.kernels_backend = backend;
    return cfg;
}

// Reapply persisted transform parameters to a freshly loaded raw block.
void apply_stored_transform(data::LocalBlock& block,
                            const transform::TransformParams& params) {
    if (params.local_means.size() != block.values.rows()) {
        throw DataFormatError("stored transform parameters do not match the block");
    }
    const std::size_t nt = block.values.cols();
    for (std::size_t i = 0; i < block.values.rows(); ++i) {
        kernels::add_scalar(block.values.row(i), nt, -params.local_means[i]);
    }
    if (params.scaling_enabled) {
        const std::size_t nx_i = block.row_range.count();
        for (std::size_t v = 0; v < params.scales.size(); ++v) {
            kernels::div_scalar(block.values.row(v * nx_i), nx_i * nt,
                                params.scales[v]);
        }
    }
}

std::vector<double> blob_row(const std::map<std::string, Matrix>& blobs,
                             const std::string& name, const std::string& path) {
    auto it = blobs.find(name);
    if (it == blobs.end()) {
        throw DataFormatError(path + ": missing section '" + name + "'");
    }
    const auto row = it->second.flat();
    return {row.begin(), row.end()};
}

int run_probe(const std::string& run_dir, const std::string& data_override,
              const std::vector<std::size_t>& vars,
              const std::vector<std::size_t>& indices) {
    if (vars.size() != indices.size()) {
        throw ConfigError("each --var needs a matching --index");
    }
    if (vars.empty()) throw ConfigError("at least one probe is required");

    pipeline::PipelineConfig cfg = pipeline::load_config(
        config::Config::parse_file((fs::path(run_dir) / "resolved.cfg").string()));
    if (!data_override.empty()) cfg.data_path = data_override;

    const data::SnapshotHeader header = data::read_header(cfg.data_path);
    postprocess::ProbeSet probes;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i] >= header.n_vars || indices[i] >= header.nx) {
            throw ConfigError("probe " + std::to_string(vars[i]) + ":" +
                              std::to_string(indices[i]) + " outside the dataset");
        }
        probes.push_back({vars[i], indices[i]});
    }

    const Matrix tr = artifacts::read_blobs(
        (fs::path(run_dir) / "reduced_map.bin").string())["Tr"];
    const Matrix qtilde = artifacts::read_blobs(
        (fs::path(run_dir) / "trajectory.bin").string())["Qtilde"];
    if (tr.empty() || qtilde.empty()) {
        throw DataFormatError("run directory is missing the reduced map or trajectory");
    }

    const data::PartitionPlan plan = data::partition_rows(header.nx, cfg.workers);
    std::ofstream manifest((fs::path(run_dir) / "probes_manifest.txt").string(),
                           std::ios::app);
    for (int rank = 0; rank < cfg.workers; ++rank) {
        postprocess::ProbeSet mine;
        for (const auto& p : probes) {
            if (p.index >= plan[static_cast<std::size_t>(rank)].begin &&
                p.index < plan[static_cast<std::size_t>(rank)].end) {
                mine.push_back(p);
            }
        }
        if (mine.empty()) continue;

        data::LocalBlock block = data::read_block(cfg.data_path, plan, rank, header);
        const std::string params_path =
            (fs::path(run_dir) / ("transform_rank" + std::to_string(rank) + ".bin"))
                .string();
        const auto blobs = artifacts::read_blobs(params_path);
        transform::TransformParams params;
        params.scaling_enabled = cfg.scaling;
        params.local_means = blob_row(blobs, "means", params_path);
        if (cfg.scaling) params.scales = blob_row(blobs, "scales", params_path);
        apply_stored_transform(block, params);

        const auto series =
            postprocess::reconstruct_probes(block, tr, qtilde, mine, params);
        for (const auto& s : series) {
            const std::string name = "probe_v" + std::to_string(s.probe.var) + "_g" +
                                     std::to_string(s.probe.index) + ".bin";
            artifacts::write_raw_vector((fs::path(run_dir) / name).string(), s.values);
            manifest << "var=" << s.probe.var << " index=" << s.probe.index
                     << " owner=" << rank << " file=" << name
                     << " steps=" << s.values.size() << '\n';
            std::cout << "wrote " << name << " (" << s.values.size() << " steps)\n";
        }
    }
    return 0;
}

struct TimingFile {
    std::string label;
    std::vector<std::string> order;
    std::map<std::string, double> mean;
    int rom_owner = -1;
    double rom_seconds = -1.0;
};

TimingFile parse_timing_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataFormatError("cannot open timing file: " + path);
    TimingFile tf;
    tf.label = fs::path(path).filename().string();
    std::map<std::string, std::pair<double, int>> acc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "rank,stage,seconds") continue;
        std::istringstream row(line);
        std::string rank_str, stage, sec_str;
        if (!std::getline(row, rank_str, ',') || !std::getline(row, stage, ',') ||
            !std::getline(row, sec_str)) {
            throw DataFormatError(path + ":" + std::to_string(line_no) +
                                  ": expected rank,stage,seconds");
        }
        const double seconds = std::stod(sec_str);
        if (stage == "rom_winner") {
            tf.rom_owner = std::stoi(rank_str);
            tf.rom_seconds = seconds;
            continue;
        }
        auto [it, inserted] = acc.try_emplace(stage, 0.0, 0);
        if (inserted) tf.order.push_back(stage);
        it->second.first += seconds;
        it->second.second += 1;
    }
    for (const auto& [stage, pair] : acc) {
        tf.mean[stage] = pair.first / pair.second;
    }
    return tf;
}

int run_report(const std::vector<std::string>& paths) {
    std::vector<TimingFile> files;
    for (const auto& p : paths) files.push_back(parse_timing_csv(p));

    std::vector<std::string> stages = files.front().order;
    for (const auto& tf : files) {
        for (const auto& s : tf.order) {
            if (std::find(stages.begin(), stages.end(), s) == stages.end()) {
                stages.push_back(s);
            }
        }
    }

    std::cout << "timing breakdown (mean seconds per stage)\n";
    for (const auto& tf : files) {
        std::cout << "  " << tf.label;
        if (tf.rom_seconds >= 0.0) {
            std::cout << "  [winning rom: rank " << tf.rom_owner << ", "
                      << fmt(tf.rom_seconds) << " s]";
        }
        std::cout << "\n";
    }
    std::vector<std::string> notes;
    for (const auto& stage : stages) {
        std::cout << "  " << stage << ":";
        for (std::size_t k = 0; k < files.size(); ++k) {
            auto it = files[k].mean.find(stage);
            if (it == files[k].mean.end()) {
                std::cout << "  -";
                notes.push_back("stage '" + stage + "' absent from " +
                                files[k].label + "; speedup omitted");
                continue;
            }
            std::cout << "  " << fmt(it->second);
            if (k > 0 && files[0].mean.count(stage)) {
                std::cout << " (x" << fmt(files[0].mean.at(stage) / it->second) << ")";
            }
        }
        std::cout << "\n";
    }
    for (const auto& n : notes) std::cout << "  note: " << n << "\n";

    std::cout << "\nstage";
    for (const auto& tf : files) std::cout << ",mean:" << tf.label;
    for (std::size_t k = 1; k < files.size(); ++k) {
        std::cout << ",speedup:" << files[k].label;
    }
    std::cout << "\n";
    for (const auto& stage : stages) {
        std::cout << stage;
        for (const auto& tf : files) {
            auto it = tf.mean.find(stage);
            std::cout << ',';
            if (it != tf.mean.end()) std::cout << fmt(it->second);
        }
        for (std::size_t k = 1; k < files.size(); ++k) {
            std::cout << ',';
            if (files[k].mean.count(stage) && files[0].mean.count(stage)) {
                std::cout << fmt(files[0].mean.at(stage) / files[k].mean.at(stage));
            }
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    // Worker threads issue LAPACK calls concurrently; a threaded BLAS
    // underneath them is both slower and unsafe.
    setenv("OPENBLAS_NUM_THREADS", "1", 0);

    CLI::App app{"distributed operator inference for quadratic reduced models"};
    app.require_subcommand(1);
    int exit_code = 0;

    auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
    std::string gen_kind, gen_out, gen_truth;
    std::uint64_t gen_seed = 1;
    std::size_t gen_vars = 1, gen_nx = 400, gen_rank = 3, gen_nt = 200;
    std::size_t gen_horizon = 0, gen_mode = 0;
    double gen_length = 1.0, gen_kappa = 1.0, gen_dt = 0.0;
    gen->add_option("--kind", gen_kind, "quadratic or diffusion")
        ->required()
        ->check(CLI::IsMember({"quadratic", "diffusion"}));
    gen->add_option("--out", gen_out, "dataset file to write")->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--vars", gen_vars, "number of state variables (quadratic)");
    gen->add_option("--nx", gen_nx, "grid points per variable");
    gen->add_option("--rank", gen_rank, "intrinsic dimension (quadratic)");
    gen->add_option("--nt", gen_nt, "training snapshots");
    gen->add_option("--horizon", gen_horizon,
                    "latent steps kept in the truth file (default 2*nt)");
    gen->add_option("--truth", gen_truth,
                    "truth sidecar path (default <out>.truth)");
    gen->add_option("--length", gen_length, "domain length (diffusion)");
    gen->add_option("--kappa", gen_kappa, "diffusivity (diffusion)");
    gen->add_option("--dt", gen_dt, "time step (diffusion; 0 picks a stable one)");
    gen->add_option("--mode", gen_mode,
                    "initial condition: 0 random smooth, k pure sine mode");
    gen->callback([&] {
        if (gen_kind == "quadratic") {
            synth::QuadraticSpec spec;
            spec.n_vars = gen_vars;
            spec.nx = gen_nx;
            spec.r_true = gen_rank;
            spec.nt = gen_nt;
            spec.nt_p = gen_horizon ? gen_horizon : 2 * gen_nt;
            spec.seed = gen_seed;
            const std::string truth =
                gen_truth.empty() ? gen_out + ".truth" : gen_truth;
            synth::generate_quadratic(spec, gen_out, truth);
            std::cout << "wrote " << gen_out << " (" << spec.n_vars
                      << " variable(s), nx = " << spec.nx << ", nt = " << spec.nt
                      << ")\nwrote " << truth << " (intrinsic dimension "
                      << spec.r_true << ", " << spec.nt_p << " latent steps)\n";
        } else {
            synth::DiffusionSpec spec;
            spec.nx = gen_nx;
            spec.nt = gen_nt;
            spec.length = gen_length;
            spec.kappa = gen_kappa;
            const double dx = gen_length / static_cast<double>(gen_nx + 1);
            spec.dt = gen_dt > 0.0 ? gen_dt : 0.4 * dx * dx / gen_kappa;
            spec.seed = gen_seed;
            spec.single_mode = gen_mode;
            synth::generate_diffusion(spec, gen_out);
            std::cout << "wrote " << gen_out << " (1 variable, nx = " << spec.nx
                      << ", nt = " << spec.nt << ", dt = " << fmt(spec.dt) << ")\n";
        }
    });

    auto* train = app.add_subcommand("train", "run the full pipeline per a config");
    std::string train_config, train_backend, train_comm = "inprocess";
    int train_workers = 0;
    bool train_dry = false;
    train->add_option("--config", train_config, "pipeline config file")->required();
    train->add_option("--workers", train_workers, "override worker count");
    train->add_option("--backend", train_backend,
                      "kernel backend: auto, scalar, avx2, neon");
    train->add_option("--comm", train_comm, "communicator: inprocess or mpi")
        ->check(CLI::IsMember({"inprocess", "mpi"}));
    train->add_flag("--dry-run", train_dry,
                    "validate the config and print the plan, write nothing");
    train->callback([&] {
        pipeline::PipelineConfig cfg =
            load_train_config(train_config, train_workers, train_backend);
        if (train_dry) {
            pipeline::dry_run(cfg, std::cout);
            return;
        }
        if (train_comm == "mpi") {
#if defined(DOPINF_HAVE_MPI)
            MPI_Init(nullptr, nullptr);
            if (!kernels::set_backend(cfg.kernels_backend)) {
                MPI_Finalize();
                throw ConfigError("kernel backend '" + cfg.kernels_backend +
                                  "' is not available on this machine");
            }
            auto comm = comm::mpi_world_comm();
            cfg.workers = comm->size();
            const pipeline::RunResult res = pipeline::run_rank(cfg, *comm);
            if (comm->rank() == 0) print_train_summary(res, cfg);
            MPI_Finalize();
#else
            throw ConfigError("this build has no MPI communicator");
#endif
            return;
        }
        print_train_summary(pipeline::run(cfg), cfg);
    });

    auto* probe = app.add_subcommand(
        "probe", "extract probe series from a finished run's artifacts");
    std::string probe_run = ".", probe_data;
    std::vector<std::size_t> probe_vars, probe_indices;
    probe->add_option("--run", probe_run, "artifact directory of a train run");
    probe->add_option("--data", probe_data, "override the dataset path");
    probe->add_option("--var", probe_vars, "variable index (repeatable)")->required();
    probe->add_option("--index", probe_indices, "grid index (repeatable)")->required();
    probe->callback(
        [&] { exit_code = run_probe(probe_run, probe_data, probe_vars, probe_indices); });

    auto* report =
        app.add_subcommand("report", "summarize timing CSVs; speedups need 2+ files");
    std::vector<std::string> report_files;
    report->add_option("files", report_files, "timings.csv paths; the first is the baseline")
        ->required()
        ->expected(-1);
    report->callback([&] { exit_code = run_report(report_files); });

    auto* verify = app.add_subcommand(
        "verify", "check a dataset against serial singular-value references");
    std::string verify_data, verify_truth;
    double verify_energy = 0.9995;
    long verify_rank = 0;
    bool verify_scaling = false;
    std::vector<int> verify_workers = {1, 2, 4};
    verify->add_option("--data", verify_data, "dataset to verify")->required();
    verify->add_option("--truth", verify_truth, "optional ground-truth sidecar");
    verify->add_option("--energy", verify_energy, "retained-energy threshold");
    verify->add_option("--rank", verify_rank, "fixed reduced dimension (overrides energy)");
    verify->add_flag("--scaling", verify_scaling, "enable max-abs variable scaling");
    verify->add_option("--workers", verify_workers, "worker counts to compare")
        ->delimiter(',');
    verify->callback([&] {
        oracle::VerifyOptions opts;
        opts.energy = verify_energy;
        opts.fixed_rank = verify_rank;
        opts.scaling = verify_scaling;
        opts.truth_path = verify_truth;
        opts.worker_counts = verify_workers;
        if (!oracle::verify_dataset(verify_data, opts, std::cout)) exit_code = 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
