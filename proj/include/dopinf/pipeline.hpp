#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "dopinf/comm.hpp"
#include "dopinf/config.hpp"
#include "dopinf/opinf.hpp"
#include "dopinf/postprocess.hpp"

namespace dopinf::pipeline {

struct PipelineConfig {
    std::string data_path;
    int workers = 1;
    std::string kernels_backend = "auto";
    double energy = 0.9995;
    long fixed_rank = 0;  // 0: select the dimension from retained energy
    bool scaling = false;
    std::vector<double> b1;
    std::vector<double> b2;
    double max_growth = 1.2;
    std::size_t nt_p = 0;  // 0: same as the training horizon
    postprocess::ProbeSet probes;
    bool write_field = true;
    std::string out_dir = ".";
};

/// Build a pipeline config from parsed `key = value` settings, applying
/// defaults and validating ranges. Unrecognized keys are reported via
/// `warnings`, one message each, without failing.
PipelineConfig load_config(const config::Config& raw,
                           std::vector<std::string>* warnings = nullptr);

inline constexpr std::size_t kStageCount = 6;
inline constexpr const char* kStageNames[kStageCount] = {
    "load", "transform", "gram_reduce", "eig_project", "search", "postprocess"};

struct RunResult {
    opinf::RegPair pair_opt;
    std::size_t r = 0;
    double train_err = 0.0;
    double retained = 0.0;
    bool rank_capped = false;  // energy target never strictly exceeded
    int owner_rank = -1;
    double rom_seconds = 0.0;
    std::size_t n_vars = 0;
    std::size_t nx = 0;
    std::size_t nt = 0;
    std::size_t nt_p = 0;
    std::vector<double> stage_seconds;  // comm size * kStageCount, rank-major
};

/// One rank's pass through the five pipeline steps. Rank 0 writes the
/// shared artifacts (result.txt, operators, reduced map, trajectory,
/// manifests, timings, resolved config); every rank writes its own
/// transform parameters, probe series and field block. All ranks return
/// identical results.
RunResult run_rank(const PipelineConfig& cfg, comm::Comm& comm);

/// Run under `cfg.workers` in-process ranks and return the shared result.
RunResult run(const PipelineConfig& cfg);

/// Validate the config against the data file and print the resolved
/// plan (partition, grid, problem sizes) without computing or writing.
void dry_run(const PipelineConfig& cfg, std::ostream& out);

}  // namespace dopinf::pipeline
