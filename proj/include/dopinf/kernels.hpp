#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dopinf::kernels {

/// Vector backends the dispatcher can select between. Scalar is always
/// available and is the reference the SIMD variants are tested against.
enum class Backend {
    Scalar,
    Avx2,
    Neon,
};

const char* backend_name(Backend b);

/// Backend all kernel entry points currently route to.
Backend active();

/// Backends usable on this machine (Scalar first).
std::vector<Backend> available();

/// Select a backend by name: "scalar", "avx2", "neon", or "auto" (best
/// available). Returns false and leaves the selection unchanged if the
/// named backend is not usable here. The DOPINF_KERNELS environment
/// variable provides the initial selection.
bool set_backend(std::string_view name);

// Data-parallel primitives. Reductions (dot/sum/max_abs) may reassociate,
// so cross-backend agreement is up to round-off, not bitwise.
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);

void axpy(double a, const double* x, double* y, std::size_t n);  // y += a*x
void add(double* acc, const double* x, std::size_t n);           // acc += x
void elem_min(double* acc, const double* x, std::size_t n);
void elem_max(double* acc, const double* x, std::size_t n);

void add_scalar(double* x, std::size_t n, double c);             // x += c
void div_scalar(double* x, std::size_t n, double s);             // x /= s
void scale_shift(double* x, std::size_t n, double a, double b);  // x = a*x + b

}  // namespace dopinf::kernels
