#pragma once

// Kolmogorov-Zurbenko Fourier transform: k passes of a length-m moving average
// applied to the series demodulated at a centre frequency nu.

#include "pcdecomp/time_series.hpp"

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pcdecomp {

struct KzftParams {
    std::size_t window = 3;     // m, odd
    std::size_t iterations = 3; // k
    double frequency = 0.0;     // nu in (0, 0.5]

    /// Total kernel length k(m-1)+1.
    std::size_t support() const noexcept { return iterations * (window - 1) + 1; }
    std::size_t half_width() const noexcept { return iterations * (window - 1) / 2; }

    void validate() const;

    bool operator==(const KzftParams&) const = default;
};

enum class Boundary {
    renormalize, // truncated kernel rescaled to unit sum; output keeps input length
    trim,        // only points with a full kernel are returned
};

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct FilteredComponent {
    TimeSeries series;
    KzftParams params;
    Boundary boundary = Boundary::renormalize;
    std::string source_name;
};

/// Coefficients a_s, s = -k(m-1)/2 .. k(m-1)/2, of ((sum_{|j|<=(m-1)/2} z^j) / m)^k.
std::vector<double> kzft_coefficients(std::size_t window, std::size_t iterations);

/// Signed frequency response sum_s a_s cos(2 pi g s) = (sin(pi m g) / (m sin(pi g)))^k.
double kz_response(std::size_t window, std::size_t iterations, double g) noexcept;

/// |kz_response|.
double kz_transfer(std::size_t window, std::size_t iterations, double g) noexcept;

/// Gain of the band centred at params.frequency evaluated at f, i.e. T(f - nu).
double transfer_gain(const KzftParams& params, double f);

/// Full width of the mainlobe where the transfer is at least 1/2.
double half_power_bandwidth(std::size_t window, std::size_t iterations);

/// Complex demodulated transform Z(t) = sum_s a_s x(t+s) exp(-i 2 pi nu s).
std::vector<std::complex<double>> kzft_transform(const TimeSeries& series, const KzftParams& params,
                                                 Boundary boundary = Boundary::renormalize);

/// Real band reconstruction y(t) = 2 Re Z(t).
FilteredComponent kzft_apply(const TimeSeries& series, const KzftParams& params,
                             Boundary boundary = Boundary::renormalize);

struct BandwidthPolicy {
    std::size_t iterations = 3;
    double max_sidelobe = 0.01;
    // Upper bound on the kernel support, normally the series length.
    std::size_t max_support = 0;
};

/// Smallest odd window per centre frequency such that the gain at every other
/// centre and at the conjugate image 2 nu is at most max_sidelobe and the
/// half-power bandwidth is at most half the smallest gap between centres.
/// Throws UnseparableError when no window within max_support qualifies.
std::vector<KzftParams> choose_bandwidth(std::span<const double> frequencies, const BandwidthPolicy& policy);

/// Window set to the nearest odd integer to periods_per_window / frequency.
KzftParams params_from_periods(double frequency, double periods_per_window, std::size_t iterations);

void write_filter_manifest(const FilteredComponent& component, const std::filesystem::path& path);

} // namespace pcdecomp
