#include "dopinf/artifacts.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dopinf/errors.hpp"

namespace dopinf::artifacts {

void write_blobs(const std::string& path, const std::vector<NamedMatrix>& blobs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataFormatError("cannot create artifact file: " + path);
    for (const NamedMatrix& blob : blobs) {
        out << "blob " << blob.name << ' ' << blob.values.rows() << ' '
            << blob.values.cols() << '\n';
        out.write(reinterpret_cast<const char*>(blob.values.data()),
                  static_cast<std::streamsize>(blob.values.size() * sizeof(double)));
    }
    if (!out) throw DataFormatError("write failed: " + path);
}

std::map<std::string, Matrix> read_blobs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("cannot open artifact file: " + path);
    std::map<std::string, Matrix> out;
    std::string header;
    while (std::getline(in, header)) {
        std::istringstream fields(header);
        std::string tag, name;
        std::size_t rows = 0, cols = 0;
        if (!(fields >> tag >> name >> rows >> cols) || tag != "blob") {
            throw DataFormatError("bad blob header in " + path + ": '" + header + "'");
        }
        Matrix values(rows, cols);
        if (!in.read(reinterpret_cast<char*>(values.data()),
                     static_cast<std::streamsize>(values.size() * sizeof(double)))) {
            throw DataFormatError("artifact file truncated in blob '" + name +
                                  "': " + path);
        }
        out[name] = std::move(values);
    }
    return out;
}

void write_result(const std::string& path, const opinf::RegPair& pair,
                  std::size_t r, double train_err) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataFormatError("cannot create result file: " + path);
    char line[64];
    std::snprintf(line, sizeof line, "beta1=%.17g\n", pair.beta1);
    out << line;
    std::snprintf(line, sizeof line, "beta2=%.17g\n", pair.beta2);
    out << line;
    out << "r=" << r << '\n';
    std::snprintf(line, sizeof line, "train_err=%.17g\n", train_err);
    out << line;
    if (!out) throw DataFormatError("write failed: " + path);
}

std::map<std::string, std::string> read_result(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataFormatError("cannot open result file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

void write_raw_vector(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataFormatError("cannot create output file: " + path);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!out) throw DataFormatError("write failed: " + path);
}

std::vector<double> read_raw_vector(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw DataFormatError("cannot open vector file: " + path);
    const std::streamoff bytes = in.tellg();
    if (bytes % static_cast<std::streamoff>(sizeof(double)) != 0) {
        throw DataFormatError("vector file size is not a multiple of 8: " + path);
    }
    std::vector<double> values(static_cast<std::size_t>(bytes) / sizeof(double));
    in.seekg(0);
    if (!values.empty() &&
        !in.read(reinterpret_cast<char*>(values.data()), bytes)) {
        throw DataFormatError("read failed: " + path);
    }
    return values;
}

}  // namespace dopinf::artifacts
