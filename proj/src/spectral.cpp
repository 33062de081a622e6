#include "pcdecomp/spectral.hpp"

#include "pcdecomp/error.hpp"
#include "pcdecomp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace pcdecomp {

Periodogram periodogram(const TimeSeries& series) {
    const std::size_t n = series.size();
    if (n < 4) throw InvalidArgument("periodogram needs at least 4 observations");

    // Twiddles indexed by (j * t) mod n; rows are gathered per frequency so the
    // inner sum is a contiguous kernel call.
    std::vector<double> cos_tab(n);
    std::vector<double> sin_tab(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        cos_tab[k] = std::cos(angle);
        sin_tab[k] = std::sin(angle);
    }

    const std::size_t half = n / 2;
    Periodogram pg;
    pg.n = n;
    pg.freqs.resize(half);
    pg.power.resize(half);

    std::vector<double> c_row(n);
    std::vector<double> s_row(n);
    const auto x = series.values();
    const std::size_t t_first = static_cast<std::size_t>(((series.t0() % static_cast<std::int64_t>(n)) + static_cast<std::int64_t>(n)) % static_cast<std::int64_t>(n));
    for (std::size_t j = 1; j <= half; ++j) {
        std::size_t idx = (j * t_first) % n;
        for (std::size_t i = 0; i < n; ++i) {
            c_row[i] = cos_tab[idx];
            s_row[i] = sin_tab[idx];
            idx += j;
            if (idx >= n) idx -= n;
        }
        double re = 0.0;
        double im = 0.0;
        kernels::dot2(x, c_row, s_row, re, im);
        pg.freqs[j - 1] = static_cast<double>(j) / static_cast<double>(n);
        pg.power[j - 1] = (re * re + im * im) / static_cast<double>(n);
    }
    return pg;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

std::vector<SpectralPeak> find_peaks(const Periodogram& pg, std::size_t max_peaks, double min_prominence_ratio) {
    if (pg.power.size() != pg.freqs.size()) throw InvalidArgument("periodogram freqs/power length mismatch");
    const std::size_t m = pg.power.size();
    std::vector<SpectralPeak> peaks;
    if (m == 0 || max_peaks == 0) return peaks;

    const double threshold = min_prominence_ratio * median(pg.power);
    const auto& p = pg.power;
    for (std::size_t i = 0; i < m; ++i) {
        // Plateaus report their first bin.
        const bool above_left = i == 0 || p[i] > p[i - 1];
        const bool above_right = i + 1 == m || p[i] >= p[i + 1];
        if (above_left && above_right && p[i] > 0.0 && p[i] >= threshold) peaks.push_back({pg.freqs[i], p[i]});
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const SpectralPeak& a, const SpectralPeak& b) {
        if (a.power != b.power) return a.power > b.power;
        return a.frequency < b.frequency;
    });
    if (peaks.size() > max_peaks) peaks.resize(max_peaks);
    return peaks;
}

void write_periodogram_csv(const Periodogram& pg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "freq,power\n";
    for (std::size_t i = 0; i < pg.freqs.size(); ++i)
        out << format_double(pg.freqs[i]) << ',' << format_double(pg.power[i]) << '\n';
}

} // namespace pcdecomp
