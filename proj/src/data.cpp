#include "dopinf/data.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "dopinf/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace dopinf::data {

namespace {

constexpr char kMagic[4] = {0x53, 0x4E, 0x50, 0x31};  // "SNP1"

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in, const char* field) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw DataFormatError(std::string("snapshot file truncated in ") + field);
    }
    return v;
}

void validate_header(const SnapshotHeader& header) {
    if (header.n_vars < 1) throw DataFormatError("snapshot header: n_vars must be >= 1");
    if (header.nx < 1) throw DataFormatError("snapshot header: nx must be >= 1");
    if (header.nt < 2) throw DataFormatError("snapshot header: nt must be >= 2");
    if (header.var_names.size() != header.n_vars) {
        throw DataFormatError("snapshot header: name count does not match n_vars");
    }
    std::set<std::string> seen;
    for (const auto& name : header.var_names) {
        if (name.empty()) throw DataFormatError("snapshot header: empty variable name");
        if (!seen.insert(name).second) {
            throw DataFormatError("snapshot header: duplicate variable name '" + name + "'");
        }
    }
}

std::uint64_t names_size(const SnapshotHeader& header) {
    std::uint64_t bytes = 0;
    for (const auto& name : header.var_names) bytes += 4 + name.size();
    return bytes;
}

std::uint64_t data_offset(const SnapshotHeader& header) {
    return 4 + 3 * 8 + names_size(header);
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataFormatError("cannot open snapshot file: " + path);
    return in;
}

// Payload-size check shared by header and block reads. When the file ends
// mid-payload, report which variable the missing bytes belong to.
void check_payload(const std::string& path, const SnapshotHeader& header) {
    std::ifstream in = open_for_read(path);
    in.seekg(0, std::ios::end);
    const std::uint64_t actual = static_cast<std::uint64_t>(in.tellg());
    const std::uint64_t per_var = header.nx * header.nt * sizeof(double);
    const std::uint64_t expected = data_offset(header) + header.n_vars * per_var;
    if (actual < expected) {
        const std::uint64_t have = actual - std::min(actual, data_offset(header));
        const std::uint64_t var = std::min<std::uint64_t>(have / per_var, header.n_vars - 1);
        throw DataFormatError("snapshot file truncated in variable '" +
                              header.var_names[static_cast<std::size_t>(var)] +
                              "': " + path);
    }
}

}  // namespace

PartitionPlan partition_rows(std::size_t nx, int p) {
    if (p < 1) {
        throw PartitionError("partition_rows: rank count must be >= 1, got " +
                             std::to_string(p));
    }
    if (static_cast<std::size_t>(p) > nx) {
        throw PartitionError("partition_rows: rank count " + std::to_string(p) +
                             " exceeds row count " + std::to_string(nx));
    }
    const std::size_t ranks = static_cast<std::size_t>(p);
    const std::size_t base = nx / ranks;
    PartitionPlan plan(ranks);
    for (std::size_t r = 0; r < ranks; ++r) {
        plan[r].begin = r * base;
        plan[r].end = (r + 1 == ranks) ? nx : (r + 1) * base;
    }
    return plan;
}

void write_snapshots(const std::string& path, const SnapshotHeader& header,
                     const std::vector<Matrix>& variables) {
    validate_header(header);
    if (variables.size() != header.n_vars) {
        throw InvalidArgumentError("write_snapshots: variable count mismatch");
    }
    for (const Matrix& var : variables) {
        if (var.rows() != header.nx || var.cols() != header.nt) {
            throw InvalidArgumentError("write_snapshots: variable shape mismatch");
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataFormatError("cannot create snapshot file: " + path);
    out.write(kMagic, sizeof kMagic);
    write_u64(out, header.n_vars);
    write_u64(out, header.nx);
    write_u64(out, header.nt);
    for (const auto& name : header.var_names) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    for (const Matrix& var : variables) {
        out.write(reinterpret_cast<const char*>(var.data()),
                  static_cast<std::streamsize>(var.size() * sizeof(double)));
    }
    if (!out) throw DataFormatError("write failed: " + path);
}

SnapshotHeader read_header(const std::string& path) {
    std::ifstream in = open_for_read(path);
    char magic[4] = {};
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataFormatError("not a snapshot file (bad magic): " + path);
    }
    SnapshotHeader header;
    header.n_vars = read_u64(in, "n_vars");
    header.nx = read_u64(in, "nx");
    header.nt = read_u64(in, "nt");
    if (header.n_vars > (1u << 20)) {
        throw DataFormatError("snapshot header: implausible n_vars");
    }
    for (std::uint64_t j = 0; j < header.n_vars; ++j) {
        std::uint32_t len = 0;
        if (!in.read(reinterpret_cast<char*>(&len), sizeof len)) {
            throw DataFormatError("snapshot file truncated in name of variable " +
                                  std::to_string(j));
        }
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) {
            throw DataFormatError("snapshot file truncated in name of variable " +
                                  std::to_string(j));
        }
        header.var_names.push_back(std::move(name));
    }
    validate_header(header);
    check_payload(path, header);
    return header;
}

LocalBlock read_block(const std::string& path, const PartitionPlan& plan,
                      int rank, const SnapshotHeader& header) {
    if (plan.empty() || plan.front().begin != 0 || plan.back().end != header.nx) {
        throw PartitionError("read_block: plan does not cover the file's rows");
    }
    for (std::size_t r = 1; r < plan.size(); ++r) {
        if (plan[r].begin != plan[r - 1].end) {
            throw PartitionError("read_block: plan intervals are not contiguous");
        }
    }
    if (rank < 0 || static_cast<std::size_t>(rank) >= plan.size()) {
        throw PartitionError("read_block: rank " + std::to_string(rank) +
                             " outside plan of size " + std::to_string(plan.size()));
    }
    check_payload(path, header);

    const RowRange range = plan[static_cast<std::size_t>(rank)];
    const std::size_t nx_i = range.count();
    const std::size_t nt = header.nt;
    LocalBlock block;
    block.rank = rank;
    block.row_range = range;
    block.values = Matrix(header.n_vars * nx_i, nt);

    std::ifstream in = open_for_read(path);
    const std::uint64_t base = data_offset(header);
    for (std::uint64_t j = 0; j < header.n_vars; ++j) {
        const std::uint64_t offset =
            base + (j * header.nx + range.begin) * nt * sizeof(double);
        in.seekg(static_cast<std::streamoff>(offset));
        char* dst = reinterpret_cast<char*>(block.values.row(j * nx_i));
        if (!in.read(dst, static_cast<std::streamsize>(nx_i * nt * sizeof(double)))) {
            throw DataFormatError("snapshot file truncated in variable '" +
                                  header.var_names[static_cast<std::size_t>(j)] +
                                  "': " + path);
        }
    }
    return block;
}

}  // namespace dopinf::data
