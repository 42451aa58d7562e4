#pragma once

#include <cstddef>

#include "dopinf/kernels.hpp"

// Internal dispatch table. Each backend provides one fully-populated
// instance; the dispatcher flips a single pointer between them.

namespace dopinf::kernels::detail {

struct KernelTable {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*add)(double*, const double*, std::size_t);
    void (*elem_min)(double*, const double*, std::size_t);
    void (*elem_max)(double*, const double*, std::size_t);
    void (*add_scalar)(double*, std::size_t, double);
    void (*div_scalar)(double*, std::size_t, double);
    void (*scale_shift)(double*, std::size_t, double, double);
};

extern const KernelTable kScalarTable;

#if defined(__x86_64__) || defined(_M_X64)
#define DOPINF_ARCH_X86_64 1
extern const KernelTable kAvx2Table;
bool avx2_usable();
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define DOPINF_ARCH_ARM64 1
extern const KernelTable kNeonTable;
#endif

}  // namespace dopinf::kernels::detail
