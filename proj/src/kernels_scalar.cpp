// Reference kernels. Plain loops, one accumulator: these define the
// semantics the SIMD variants are equivalence-tested against.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "kernels_table.hpp"

namespace dopinf::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scalar_arrays(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void elem_min_scalar(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = std::min(acc[i], x[i]);
}

void elem_max_scalar(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = std::max(acc[i], x[i]);
}

void add_const_scalar(double* x, std::size_t n, double c) {
    for (std::size_t i = 0; i < n; ++i) x[i] += c;
}

void div_const_scalar(double* x, std::size_t n, double s) {
    for (std::size_t i = 0; i < n; ++i) x[i] /= s;
}

void scale_shift_scalar(double* x, std::size_t n, double a, double b) {
    for (std::size_t i = 0; i < n; ++i) x[i] = a * x[i] + b;
}

}  // namespace

const KernelTable kScalarTable = {
    Backend::Scalar,      dot_scalar,      sum_scalar,      max_abs_scalar,
    axpy_scalar,          add_scalar_arrays, elem_min_scalar, elem_max_scalar,
    add_const_scalar,     div_const_scalar, scale_shift_scalar,
};

}  // namespace dopinf::kernels::detail
