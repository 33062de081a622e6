#include "pcdecomp/kernels.hpp"

namespace pcdecomp::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void dot2_scalar(const double* x, const double* c, const double* s, std::size_t n,
                 double* out_c, double* out_s) {
    double acc_c = 0.0;
    double acc_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc_c += x[i] * c[i];
        acc_s += x[i] * s[i];
    }
    *out_c = acc_c;
    *out_s = acc_s;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kScalar{Isa::scalar, dot_scalar, dot2_scalar, sum_scalar, axpy_scalar};

} // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

} // namespace pcdecomp::kernels
