#if defined(DOPINF_HAVE_MPI)

#include <mpi.h>

#include <string>

#include "dopinf/comm.hpp"
#include "dopinf/errors.hpp"

namespace dopinf::comm {

namespace {

void check(int code, const char* what) {
    if (code != MPI_SUCCESS) {
        throw CollectiveError(std::string(what) + " failed (MPI error " +
                              std::to_string(code) + ")");
    }
}

MPI_Op to_mpi(ReduceOp op) {
    switch (op) {
        case ReduceOp::Sum: return MPI_SUM;
        case ReduceOp::Max: return MPI_MAX;
        case ReduceOp::Min: return MPI_MIN;
    }
    return MPI_SUM;
}

// Unlike the in-process group, MPI cannot see peer buffer shapes, so a
// rank mismatch here is undefined behavior at the MPI level rather than
// a detected CollectiveError. Reduction order follows the MPI library.
class MpiComm final : public Comm {
public:
    MpiComm() {
        check(MPI_Comm_rank(MPI_COMM_WORLD, &rank_), "MPI_Comm_rank");
        check(MPI_Comm_size(MPI_COMM_WORLD, &size_), "MPI_Comm_size");
    }

    int rank() const override { return rank_; }
    int size() const override { return size_; }

    void allreduce(std::span<double> data, ReduceOp op) override {
        check(MPI_Allreduce(MPI_IN_PLACE, data.data(),
                            static_cast<int>(data.size()), MPI_DOUBLE,
                            to_mpi(op), MPI_COMM_WORLD),
              "MPI_Allreduce");
    }

    void broadcast(std::span<double> data, int owner) override {
        check(MPI_Bcast(data.data(), static_cast<int>(data.size()), MPI_DOUBLE,
                        owner, MPI_COMM_WORLD),
              "MPI_Bcast");
    }

    void barrier() override { check(MPI_Barrier(MPI_COMM_WORLD), "MPI_Barrier"); }

private:
    int rank_ = 0;
    int size_ = 1;
};

}  // namespace

std::unique_ptr<Comm> mpi_world_comm() { return std::make_unique<MpiComm>(); }

}  // namespace dopinf::comm

#endif  // DOPINF_HAVE_MPI
