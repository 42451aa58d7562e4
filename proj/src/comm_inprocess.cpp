#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dopinf/comm.hpp"
#include "dopinf/errors.hpp"
#include "dopinf/kernels.hpp"

namespace dopinf::comm {

double allreduce_scalar(Comm& comm, double value, ReduceOp op) {
    comm.allreduce({&value, 1}, op);
    return value;
}

namespace {

// A collective proceeds in two barrier-separated phases. Phase one: every
// rank deposits its buffer descriptor and waits. Phase two: every rank
// reads all descriptors, checks they agree, and computes or copies; a
// trailing barrier keeps buffers pinned until all peers are done reading.
class Group {
public:
    explicit Group(int size) : size_(size), slots_(static_cast<std::size_t>(size)) {}

    struct Slot {
        double* data = nullptr;
        std::size_t count = 0;
        int tag = 0;  // ReduceOp for allreduce, owner rank for broadcast
    };

    int size() const { return size_; }
    Slot& slot(int rank) { return slots_[static_cast<std::size_t>(rank)]; }

    // Generation-counted barrier. A poisoned group releases every waiter
    // with CollectiveError instead of deadlocking on the missing rank.
    void sync() {
        std::unique_lock lk(mu_);
        if (poisoned_) throw CollectiveError(poison_msg_);
        const std::uint64_t gen = generation_;
        if (++arrived_ == size_) {
            arrived_ = 0;
            ++generation_;
            cv_.notify_all();
            return;
        }
        const bool ok = cv_.wait_for(lk, kTimeout, [&] {
            return generation_ != gen || poisoned_;
        });
        if (generation_ != gen) return;
        if (!ok) {
            poison_locked("collective timed out waiting for peer ranks");
        }
        throw CollectiveError(poison_msg_);
    }

    void poison(const std::string& msg) {
        std::lock_guard lk(mu_);
        poison_locked(msg);
    }

private:
    void poison_locked(const std::string& msg) {
        if (!poisoned_) {
            poisoned_ = true;
            poison_msg_ = msg;
        }
        cv_.notify_all();
    }

    static constexpr std::chrono::seconds kTimeout{60};

    const int size_;
    std::vector<Slot> slots_;
    std::mutex mu_;
    std::condition_variable cv_;
    int arrived_ = 0;
    std::uint64_t generation_ = 0;
    bool poisoned_ = false;
    std::string poison_msg_;
};

class InProcessComm final : public Comm {
public:
    InProcessComm(Group& group, int rank) : group_(group), rank_(rank) {}

    int rank() const override { return rank_; }
    int size() const override { return group_.size(); }

    void allreduce(std::span<double> data, ReduceOp op) override {
        group_.slot(rank_) = {data.data(), data.size(), static_cast<int>(op)};
        group_.sync();
        verify_uniform(data.size(), static_cast<int>(op), "allreduce");

        // Every rank combines in ascending rank order, so all ranks land
        // on bitwise identical results without a data exchange phase.
        const Group::Slot& first = group_.slot(0);
        std::vector<double> acc(first.data, first.data + first.count);
        for (int r = 1; r < group_.size(); ++r) {
            const Group::Slot& s = group_.slot(r);
            switch (op) {
                case ReduceOp::Sum: kernels::add(acc.data(), s.data, s.count); break;
                case ReduceOp::Max: kernels::elem_max(acc.data(), s.data, s.count); break;
                case ReduceOp::Min: kernels::elem_min(acc.data(), s.data, s.count); break;
            }
        }
        group_.sync();
        std::copy(acc.begin(), acc.end(), data.begin());
    }

    void broadcast(std::span<double> data, int owner) override {
        if (owner < 0 || owner >= group_.size()) {
            group_.poison("broadcast: owner rank out of range");
            throw CollectiveError("broadcast: owner rank " + std::to_string(owner) +
                                  " out of range for group size " +
                                  std::to_string(group_.size()));
        }
        group_.slot(rank_) = {data.data(), data.size(), owner};
        group_.sync();
        verify_uniform(data.size(), owner, "broadcast");
        if (rank_ != owner) {
            const Group::Slot& src = group_.slot(owner);
            std::copy(src.data, src.data + src.count, data.begin());
        }
        group_.sync();
    }

    void barrier() override { group_.sync(); }

private:
    // The deposited slots are a pure function of what all ranks passed, so
    // every rank reaches the same verdict and throws the same error.
    void verify_uniform(std::size_t count, int tag, const char* what) {
        for (int r = 0; r < group_.size(); ++r) {
            const Group::Slot& s = group_.slot(r);
            if (s.count != count || s.tag != tag) {
                group_.poison(std::string(what) + ": ranks disagree on buffer "
                              "shape or operation");
                throw CollectiveError(
                    std::string(what) + ": rank " + std::to_string(rank_) +
                    " passed count " + std::to_string(count) + ", rank " +
                    std::to_string(r) + " passed count " + std::to_string(s.count));
            }
        }
    }

    Group& group_;
    const int rank_;
};

}  // namespace

void run_on_workers(int size, const std::function<void(Comm&)>& fn) {
    if (size < 1) {
        throw InvalidArgumentError("run_on_workers: size must be at least 1");
    }
    Group group(size);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(size));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(size));
    for (int r = 0; r < size; ++r) {
        threads.emplace_back([&, r] {
            try {
                InProcessComm comm(group, r);
                fn(comm);
            } catch (...) {
                errors[static_cast<std::size_t>(r)] = std::current_exception();
                group.poison("rank " + std::to_string(r) + " aborted");
            }
        });
    }
    for (auto& t : threads) t.join();

    // Peers of a failed rank throw CollectiveError from inside a
    // collective; prefer the root cause over those secondary aborts.
    auto is_secondary = [](const std::exception_ptr& e) {
        try {
            std::rethrow_exception(e);
        } catch (const CollectiveError&) {
            return true;
        } catch (...) {
            return false;
        }
    };
    for (const auto& err : errors) {
        if (err && !is_secondary(err)) std::rethrow_exception(err);
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

}  // namespace dopinf::comm
