#include "dopinf/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "kernels_table.hpp"

namespace dopinf::kernels {
namespace {

using detail::KernelTable;

const KernelTable* best_table() {
#if defined(DOPINF_ARCH_X86_64)
    if (detail::avx2_usable()) return &detail::kAvx2Table;
#endif
#if defined(DOPINF_ARCH_ARM64)
    return &detail::kNeonTable;
#endif
    return &detail::kScalarTable;
}

const KernelTable* table_for(std::string_view name) {
    if (name == "scalar") return &detail::kScalarTable;
    if (name == "auto") return best_table();
#if defined(DOPINF_ARCH_X86_64)
    if (name == "avx2" && detail::avx2_usable()) return &detail::kAvx2Table;
#endif
#if defined(DOPINF_ARCH_ARM64)
    if (name == "neon") return &detail::kNeonTable;
#endif
    return nullptr;
}

const KernelTable* initial_table() {
    if (const char* env = std::getenv("DOPINF_KERNELS")) {
        if (const KernelTable* t = table_for(env)) return t;
    }
    return best_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

const KernelTable& tab() { return *current().load(std::memory_order_relaxed); }

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "?";
}

Backend active() { return tab().backend; }

std::vector<Backend> available() {
    std::vector<Backend> out{Backend::Scalar};
#if defined(DOPINF_ARCH_X86_64)
    if (detail::avx2_usable()) out.push_back(Backend::Avx2);
#endif
#if defined(DOPINF_ARCH_ARM64)
    out.push_back(Backend::Neon);
#endif
    return out;
}

bool set_backend(std::string_view name) {
    const KernelTable* t = table_for(name);
    if (!t) return false;
    current().store(t, std::memory_order_relaxed);
    return true;
}

double dot(const double* a, const double* b, std::size_t n) { return tab().dot(a, b, n); }
double sum(const double* x, std::size_t n) { return tab().sum(x, n); }
double max_abs(const double* x, std::size_t n) { return tab().max_abs(x, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { tab().axpy(a, x, y, n); }
void add(double* acc, const double* x, std::size_t n) { tab().add(acc, x, n); }
void elem_min(double* acc, const double* x, std::size_t n) { tab().elem_min(acc, x, n); }
void elem_max(double* acc, const double* x, std::size_t n) { tab().elem_max(acc, x, n); }
void add_scalar(double* x, std::size_t n, double c) { tab().add_scalar(x, n, c); }
void div_scalar(double* x, std::size_t n, double s) { tab().div_scalar(x, n, s); }
void scale_shift(double* x, std::size_t n, double a, double b) { tab().scale_shift(x, n, a, b); }

}  // namespace dopinf::kernels
