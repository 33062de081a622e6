#pragma once

// Periodic block bootstrap: whole period-aligned blocks are redrawn with
// replacement so every value keeps its phase within the period.

#include "pcdecomp/kzft.hpp"
#include "pcdecomp/time_series.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pcdecomp {

struct BlockPlan {
    std::size_t period = 1;      // block length
    std::size_t n_blocks = 0;
    std::size_t trimmed_len = 0; // n_blocks * period
};

/// floor(series_len / p) non-overlapping blocks; the trailing partial block is dropped.
BlockPlan make_block_plan(std::size_t series_len, std::size_t period);

struct BootstrapEnsemble {
    std::vector<TimeSeries> resamples;
    BlockPlan plan;
    std::uint64_t seed = 0;
};

/// B resamples, each a concatenation of n_blocks source blocks drawn uniformly
/// with replacement. Resample b uses its own RNG stream derived from (seed, b),
/// so the result does not depend on `threads`.
BootstrapEnsemble pbb_resample(const TimeSeries& source, const BlockPlan& plan, std::size_t resamples,
                               std::uint64_t seed, std::size_t threads = 1);
BootstrapEnsemble pbb_resample(const FilteredComponent& component, const BlockPlan& plan, std::size_t resamples,
                               std::uint64_t seed, std::size_t threads = 1);

/// Resample i of the result is the pointwise sum of resample i of every
/// ensemble, after truncating all to the shortest trimmed length.
std::vector<TimeSeries> sum_ensembles(std::span<const BootstrapEnsemble> ensembles);

struct PhaseInterval {
    std::size_t phase;
    double low;
    double mean;
    double high;
};

/// Per-phase empirical `level` band of the resample phase means.
std::vector<PhaseInterval> periodic_mean_ci(const BootstrapEnsemble& ensemble, double level = 0.95);

/// Linear-interpolation quantile of already sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

void write_ci_csv(std::span<const PhaseInterval> ci, const std::filesystem::path& path);

/// resample_0000.csv ... plus ci.csv when `ci` is non-empty.
void write_ensemble(const BootstrapEnsemble& ensemble, std::span<const PhaseInterval> ci,
                    const std::filesystem::path& dir);

} // namespace pcdecomp
