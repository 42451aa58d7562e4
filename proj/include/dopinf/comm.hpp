#pragma once

#include <functional>
#include <memory>
#include <span>

namespace dopinf::comm {

enum class ReduceOp { Sum, Max, Min };

/// Collective surface the pipeline runs against. Backends: an in-process
/// thread group (default, deterministic) and MPI (optional build).
class Comm {
public:
    virtual ~Comm() = default;

    virtual int rank() const = 0;
    virtual int size() const = 0;

    /// Element-wise reduction across ranks; every rank receives the result
    /// in place. All ranks must pass the same element count and the same
    /// op. Sum combines in ascending rank order, so for a fixed group size
    /// the result is bitwise reproducible.
    virtual void allreduce(std::span<double> data, ReduceOp op) = 0;

    /// Copy `data` from rank `owner` to every rank. All ranks must pass
    /// the same element count and the same owner.
    virtual void broadcast(std::span<double> data, int owner) = 0;

    virtual void barrier() = 0;
};

/// Reduce one value across ranks and return the combined result.
double allreduce_scalar(Comm& comm, double value, ReduceOp op);

/// Run `fn(comm)` on `size` in-process ranks, one thread per rank. An
/// exception on any rank poisons the group: peers blocked in a collective
/// throw CollectiveError, and after all threads join the original
/// exception from the lowest failing rank is rethrown here.
void run_on_workers(int size, const std::function<void(Comm&)>& fn);

#if defined(DOPINF_HAVE_MPI)
/// Adapter over MPI_COMM_WORLD. The caller owns MPI_Init / MPI_Finalize.
std::unique_ptr<Comm> mpi_world_comm();
#endif

}  // namespace dopinf::comm
