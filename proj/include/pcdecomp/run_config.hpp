#pragma once

#include "pcdecomp/amplitude_mcmc.hpp"
#include "pcdecomp/kzft.hpp"
#include "pcdecomp/time_series.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pcdecomp {

struct SimulationSpec {
    std::vector<SinusoidModel> components;
    double noise_sd = 10.0;
    std::size_t n = 300;
    std::int64_t t0 = 1;
    std::optional<std::uint64_t> seed; // defaults to the run seed
};

enum class FilterMode {
    bandwidth,          // choose_bandwidth over all centre frequencies
    fixed,              // explicit window per frequency
    periods_per_window, // window ~ periods_per_window / frequency
};

struct FilterPolicy {
    FilterMode mode = FilterMode::bandwidth;
    std::size_t iterations = 3;
    double max_sidelobe = 0.01;
    std::vector<std::size_t> windows; // FilterMode::fixed, one per frequency
    double periods_per_window = 3.0;
    Boundary boundary = Boundary::renormalize;
};

enum class PhaseMode { zero, aligned };

struct RunConfig {
    std::optional<std::string> input;
    std::optional<SimulationSpec> simulation;

    bool auto_frequencies = false;
    std::vector<double> frequencies;
    std::size_t max_peaks = 4;
    double min_prominence_ratio = 10.0;

    FilterPolicy filter;

    std::size_t resamples = 200;
    double ci_level = 0.95;
    double significance_fraction = 0.25;
    bool per_resample_mcmc = false;
    bool export_resamples = false;

    McmcConfig mcmc;
    AmplitudeModel prior; // period and phase are set per component
    PhaseMode phase_mode = PhaseMode::zero;

    bool detrend = true;
    bool extrapolate_trend = true;
    std::size_t forecast_horizon = 0;
    std::uint64_t seed = 1;

    // Runtime only; never written to the manifest.
    std::string output_dir = "run";
    std::size_t threads = 0;

    void validate() const;
};

/// Accepts a run configuration document or a run manifest (its "config" member).
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical form used in manifests; round-trips through run_config_from_json.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Parses "0.25", "1/12" or a JSON number.
double parse_frequency(const nlohmann::json& value);

std::string to_string(PhaseMode m);
std::string to_string(FilterMode m);

} // namespace pcdecomp
