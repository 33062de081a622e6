#pragma once

// Two-stage decomposition: detrend, isolate each periodic component with a
// KZFT band, bootstrap it with period-length blocks to judge significance,
// sample its amplitude, then sum the fitted sinusoids back onto the trend.

#include "pcdecomp/amplitude_mcmc.hpp"
#include "pcdecomp/bootstrap.hpp"
#include "pcdecomp/kzft.hpp"
#include "pcdecomp/run_config.hpp"
#include "pcdecomp/spectral.hpp"
#include "pcdecomp/time_series.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pcdecomp {

struct FittedComponent {
    double frequency = 0.0;
    double period = 0.0; // exactly 1 / frequency
    double phase = 0.0;
    AmplitudeEstimate estimate;
    bool significant = true;
};

struct McpFit {
    std::vector<FittedComponent> components; // frequency order; excluded ones kept for reporting
    TrendLine trend;
    bool extrapolate_trend = true;
    std::int64_t t_first = 1;
    std::int64_t t_last = 1;
    TimeSeries fitted{std::vector<double>{0.0}};
    std::optional<TimeSeries> forecast;
};

/// trend(t) + sum over significant components of mean_A sin(2 pi t / p + phi)
/// for t in [t_first, t_last]. Beyond the sample the trend is extrapolated, or
/// held at its last in-sample value when extrapolation is disabled.
TimeSeries reconstruct(const McpFit& fit, std::int64_t t_first, std::int64_t t_last);

struct ResidualDiagnostics {
    TimeSeries residual{std::vector<double>{0.0}};
    double residual_variance = 0.0;
    double input_variance = 0.0;
    double variance_ratio = 0.0;
    std::optional<Periodogram> periodogram; // absent for series shorter than 4
};

ResidualDiagnostics residual_diagnostics(const McpFit& fit, const TimeSeries& input);

struct ResampleFitStats {
    double mean_amplitude;
    double sd_amplitude;
    std::size_t count;
};

struct ComponentRun {
    double frequency = 0.0;
    std::size_t block_period = 0;
    KzftParams params;
    std::uint64_t seed = 0;
    FilteredComponent filtered{TimeSeries{std::vector<double>{0.0}}, {}, Boundary::renormalize, {}};
    std::vector<PhaseInterval> ci;
    double zero_excluded_fraction = 0.0;
    bool significant = false;
    double phase = 0.0;
    PosteriorChain chain;
    AmplitudeEstimate estimate;
    std::optional<ResampleFitStats> resample_fits;
    std::optional<BootstrapEnsemble> ensemble; // kept only when exporting resamples
};

struct PipelineRun {
    RunConfig config;
    TimeSeries input{std::vector<double>{0.0}};
    Detrended detrended{TimeSeries{std::vector<double>{0.0}}, {}};
    std::vector<SpectralPeak> detected_peaks;
    std::vector<ComponentRun> components;
    McpFit fit;
    ResidualDiagnostics diagnostics;
    nlohmann::ordered_json manifest;

    std::size_t significant_count() const noexcept;
};

/// Runs every stage. Deterministic in the config (thread count does not
/// matter). Throws UnseparableError when the bandwidth rule fails.
PipelineRun run_pipeline(const RunConfig& config);

/// Same, on an already loaded series (config input/simulation is ignored).
PipelineRun run_pipeline(const RunConfig& config, const TimeSeries& input);

TimeSeries load_input(const RunConfig& config);

/// manifest.json, fit.csv, forecast.csv, residuals.csv, periodogram.csv and
/// components/<freq>/{filtered.csv,filtered.json,ci.csv,chain.csv,summary.json}.
void write_run_directory(const PipelineRun& run, const std::filesystem::path& dir);

std::string component_dir_name(double frequency);

nlohmann::ordered_json to_json(const AmplitudeEstimate& est);

} // namespace pcdecomp
