#pragma once

#include <map>
#include <string>
#include <vector>

#include "dopinf/matrix.hpp"
#include "dopinf/opinf.hpp"

namespace dopinf::artifacts {

// Persisted matrices use a minimal container: per section one ASCII
// header line `blob <name> <rows> <cols>\n` followed by rows*cols
// little-endian real64 values; sections concatenate freely in one file.

struct NamedMatrix {
    std::string name;
    Matrix values;
};

void write_blobs(const std::string& path, const std::vector<NamedMatrix>& blobs);
std::map<std::string, Matrix> read_blobs(const std::string& path);

/// Winning pair, reduced dimension and training error as plain text
/// (`beta1=...`, `beta2=...`, `r=...`, `train_err=...`).
void write_result(const std::string& path, const opinf::RegPair& pair,
                  std::size_t r, double train_err);
std::map<std::string, std::string> read_result(const std::string& path);

/// One raw little-endian real64 vector, no header (probe series format).
void write_raw_vector(const std::string& path, const std::vector<double>& values);
std::vector<double> read_raw_vector(const std::string& path);

}  // namespace dopinf::artifacts
