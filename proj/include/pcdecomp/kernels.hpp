#pragma once

// Data-parallel inner loops shared by the filters, the periodogram and the
// likelihood. Every kernel has a scalar reference implementation; wider
// variants are compiled separately and picked once at startup.

#include <cstddef>
#include <span>
#include <string_view>

namespace pcdecomp::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // Simultaneous sums of x*c and x*s.
    void (*dot2)(const double* x, const double* c, const double* s, std::size_t n,
                 double* out_c, double* out_s);
    double (*sum)(const double* x, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_table() noexcept;

// Table used by the library. Chosen from CPU features on first use; the
// PCDECOMP_KERNELS environment variable ("scalar" or "avx2") overrides.
const KernelTable& active() noexcept;

// Returns false (and leaves the selection unchanged) if `isa` is unavailable.
bool select(Isa isa) noexcept;

std::string_view name(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void dot2(std::span<const double> x, std::span<const double> c, std::span<const double> s,
                 double& out_c, double& out_s) noexcept {
    active().dot2(x.data(), c.data(), s.data(), x.size(), &out_c, &out_s);
}

inline double sum(std::span<const double> x) noexcept {
    return active().sum(x.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    active().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

} // namespace pcdecomp::kernels
