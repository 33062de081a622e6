#pragma once

#include "pcdecomp/time_series.hpp"

#include <filesystem>
#include <vector>

namespace pcdecomp {

/// Raw periodogram at the positive Fourier frequencies j/n, j = 1..floor(n/2),
/// normalised as I(j/n) = |sum_t x_t exp(-i 2 pi j t / n)|^2 / n so a unit
/// sine at a Fourier frequency peaks at n/4.
struct Periodogram {
    std::vector<double> freqs;
    std::vector<double> power;
    std::size_t n = 0;
};

Periodogram periodogram(const TimeSeries& series);

struct SpectralPeak {
    double frequency;
    double power;

    bool operator==(const SpectralPeak&) const = default;
};

/// Local maxima with power >= min_prominence_ratio * median(power), strongest
/// first; equal powers are ordered by lower frequency.
std::vector<SpectralPeak> find_peaks(const Periodogram& pg, std::size_t max_peaks,
                                     double min_prominence_ratio = 10.0);

double median(std::vector<double> values);

void write_periodogram_csv(const Periodogram& pg, const std::filesystem::path& path);

} // namespace pcdecomp
