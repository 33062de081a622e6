#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pcdecomp {

/// Regularly sampled real-valued series. Observation i sits at integer time
/// t0 + i; values are non-empty and finite.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values, std::int64_t t0 = 1, std::string name = {});

    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    std::size_t size() const noexcept { return values_.size(); }
    std::int64_t t0() const noexcept { return t0_; }
    std::int64_t time(std::size_t i) const noexcept { return t0_ + static_cast<std::int64_t>(i); }
    std::int64_t last_time() const noexcept { return time(values_.size() - 1); }

    const std::string& name() const noexcept { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    bool operator==(const TimeSeries& other) const = default;

private:
    std::vector<double> values_;
    std::int64_t t0_;
    std::string name_;
};

/// x(t) = A sin(2 pi t / p + phi), A >= 0, p > 0, phi kept in [0, 2 pi).
class SinusoidModel {
public:
    SinusoidModel(double amplitude, double period, double phase = 0.0);

    double amplitude() const noexcept { return amplitude_; }
    double period() const noexcept { return period_; }
    double phase() const noexcept { return phase_; }
    double frequency() const noexcept { return 1.0 / period_; }

    double operator()(double t) const noexcept;

private:
    double amplitude_;
    double period_;
    double phase_;
};

double normalize_phase(double phase) noexcept;

struct TrendLine {
    double intercept = 0.0;
    double slope = 0.0;

    double operator()(double t) const noexcept { return intercept + slope * t; }
};

/// Sum of sinusoids at t = t0 .. t0+n-1 plus i.i.d. N(0, noise_sd^2) noise.
/// Identical arguments give bit-identical output.
TimeSeries simulate_mpc(std::span<const SinusoidModel> components, double noise_sd, std::size_t n,
                        std::uint64_t seed, std::int64_t t0 = 1);

struct Detrended {
    TimeSeries residual;
    TrendLine trend;
};

/// Removes the ordinary least squares line of value on t.
Detrended detrend_linear(const TimeSeries& series);

/// Fits the line jointly with sin/cos terms at the given frequencies and
/// removes the line only. Sinusoids at these frequencies do not leak into the
/// trend.
Detrended detrend_linear(const TimeSeries& series, std::span<const double> frequencies);

// CSV with header `t,value`; t must increase by exactly 1 per row.
TimeSeries read_csv(const std::filesystem::path& path);
TimeSeries parse_csv(std::istream& in, const std::string& source = "<stream>");
void write_csv(const TimeSeries& series, const std::filesystem::path& path);
void write_csv(const TimeSeries& series, std::ostream& out);

// Shortest text that parses back to the same double.
std::string format_double(double value);

} // namespace pcdecomp
