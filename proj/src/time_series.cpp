#include "pcdecomp/time_series.hpp"

#include "pcdecomp/error.hpp"
#include "pcdecomp/kernels.hpp"
#include "pcdecomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pcdecomp {

TimeSeries::TimeSeries(std::vector<double> values, std::int64_t t0, std::string name)
    : values_(std::move(values)), t0_(t0), name_(std::move(name)) {
    if (values_.empty()) throw InvalidArgument("time series must contain at least one value");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw InvalidArgument("time series value at t=" + std::to_string(time(i)) + " is not finite");
    }
}

double normalize_phase(double phase) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phase, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

SinusoidModel::SinusoidModel(double amplitude, double period, double phase)
    : amplitude_(amplitude), period_(period), phase_(normalize_phase(phase)) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw InvalidArgument("sinusoid period must be positive and finite");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw InvalidArgument("sinusoid amplitude must be nonnegative and finite");
    if (!std::isfinite(phase)) throw InvalidArgument("sinusoid phase must be finite");
}

double SinusoidModel::operator()(double t) const noexcept {
    return amplitude_ * std::sin(2.0 * std::numbers::pi * t / period_ + phase_);
}

TimeSeries simulate_mpc(std::span<const SinusoidModel> components, double noise_sd, std::size_t n,
                        std::uint64_t seed, std::int64_t t0) {
    if (n == 0) throw InvalidArgument("simulation length n must be at least 1");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
        throw InvalidArgument("noise_sd must be nonnegative and finite");

    std::vector<double> values(n, 0.0);
    for (const auto& c : components) {
        for (std::size_t i = 0; i < n; ++i) values[i] += c(static_cast<double>(t0 + static_cast<std::int64_t>(i)));
    }
    if (noise_sd > 0.0) {
        Engine rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sd);
        for (auto& v : values) v += noise(rng);
    }
    return TimeSeries(std::move(values), t0, "simulated");
}

Detrended detrend_linear(const TimeSeries& series) {
    const std::size_t n = series.size();
    if (n < 2) throw InvalidArgument("detrending needs at least 2 observations");

    // Centred time keeps the normal equations well conditioned.
    const double t_mean = static_cast<double>(series.t0()) + 0.5 * static_cast<double>(n - 1);
    std::vector<double> tc(n);
    for (std::size_t i = 0; i < n; ++i) tc[i] = static_cast<double>(series.time(i)) - t_mean;

    const auto x = series.values();
    const double x_mean = kernels::sum(x) / static_cast<double>(n);
    const double sxx = kernels::dot(tc, tc);
    const double sxy = kernels::dot(tc, x);

    TrendLine trend;
    trend.slope = sxy / sxx;
    trend.intercept = x_mean - trend.slope * t_mean;

    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i)
        residual[i] = x[i] - trend(static_cast<double>(series.time(i)));
    return {TimeSeries(std::move(residual), series.t0(), series.name()), trend};
}

Detrended detrend_linear(const TimeSeries& series, std::span<const double> frequencies) {
    if (frequencies.empty()) return detrend_linear(series);
    const std::size_t n = series.size();
    const std::size_t cols = 2 + 2 * frequencies.size();
    if (n < cols) throw InvalidArgument("detrending needs at least as many observations as regressors");

    const double t_mean = static_cast<double>(series.t0()) + 0.5 * static_cast<double>(n - 1);
    const double t_scale = std::max(1.0, 0.5 * static_cast<double>(n - 1));
    std::vector<std::vector<double>> design(cols, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(series.time(i));
        design[0][i] = 1.0;
        design[1][i] = (t - t_mean) / t_scale;
        for (std::size_t j = 0; j < frequencies.size(); ++j) {
            const double w = 2.0 * std::numbers::pi * frequencies[j] * t;
            design[2 + 2 * j][i] = std::sin(w);
            design[3 + 2 * j][i] = std::cos(w);
        }
    }

    // Normal equations, Gaussian elimination with partial pivoting.
    const auto x = series.values();
    std::vector<std::vector<double>> a(cols, std::vector<double>(cols + 1));
    for (std::size_t r = 0; r < cols; ++r) {
        for (std::size_t c = 0; c < cols; ++c) a[r][c] = kernels::dot(design[r], design[c]);
        a[r][cols] = kernels::dot(design[r], x);
    }
    for (std::size_t k = 0; k < cols; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < cols; ++r)
            if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
        if (std::abs(a[piv][k]) < 1e-12 * static_cast<double>(n))
            throw InvalidArgument("trend and sinusoid regressors are collinear");
        std::swap(a[k], a[piv]);
        for (std::size_t r = k + 1; r < cols; ++r) {
            const double f = a[r][k] / a[k][k];
            for (std::size_t c = k; c <= cols; ++c) a[r][c] -= f * a[k][c];
        }
    }
    std::vector<double> beta(cols);
    for (std::size_t k = cols; k-- > 0;) {
        double v = a[k][cols];
        for (std::size_t c = k + 1; c < cols; ++c) v -= a[k][c] * beta[c];
        beta[k] = v / a[k][k];
    }

    TrendLine trend;
    trend.slope = beta[1] / t_scale;
    trend.intercept = beta[0] - trend.slope * t_mean;
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i)
        residual[i] = x[i] - trend(static_cast<double>(series.time(i)));
    return {TimeSeries(std::move(residual), series.t0(), series.name()), trend};
}

} // namespace pcdecomp
