#include "pcdecomp/bootstrap.hpp"

#include "pcdecomp/error.hpp"
#include "pcdecomp/kernels.hpp"
#include "pcdecomp/parallel.hpp"
#include "pcdecomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace pcdecomp {

BlockPlan make_block_plan(std::size_t series_len, std::size_t period) {
    if (period == 0) throw InvalidArgument("block period must be positive");
    if (series_len < period)
        throw InvalidArgument("series length " + std::to_string(series_len) + " is shorter than the period " +
                              std::to_string(period));
    const std::size_t blocks = series_len / period;
    return BlockPlan{period, blocks, blocks * period};
}

BootstrapEnsemble pbb_resample(const TimeSeries& source, const BlockPlan& plan, std::size_t resamples,
                               std::uint64_t seed, std::size_t threads) {
    if (resamples == 0) throw InvalidArgument("number of resamples must be at least 1");
    if (plan.period == 0 || plan.n_blocks == 0 || plan.trimmed_len != plan.n_blocks * plan.period)
        throw InvalidArgument("inconsistent block plan");
    if (source.size() < plan.trimmed_len || source.size() >= plan.trimmed_len + plan.period)
        throw InvalidArgument("block plan does not match the source length");

    const auto x = source.values();
    std::vector<std::vector<double>> drawn(resamples);
    parallel_for(resamples, threads, [&](std::size_t b) {
        Engine rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        std::uniform_int_distribution<std::size_t> pick(0, plan.n_blocks - 1);
        std::vector<double> values(plan.trimmed_len);
        for (std::size_t slot = 0; slot < plan.n_blocks; ++slot) {
            const std::size_t src = pick(rng) * plan.period;
            std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(src), plan.period,
                        values.begin() + static_cast<std::ptrdiff_t>(slot * plan.period));
        }
        drawn[b] = std::move(values);
    });

    BootstrapEnsemble ensemble;
    ensemble.plan = plan;
    ensemble.seed = seed;
    ensemble.resamples.reserve(resamples);
    for (auto& v : drawn) ensemble.resamples.emplace_back(std::move(v), source.t0(), source.name());
    return ensemble;
}

BootstrapEnsemble pbb_resample(const FilteredComponent& component, const BlockPlan& plan, std::size_t resamples,
                               std::uint64_t seed, std::size_t threads) {
    return pbb_resample(component.series, plan, resamples, seed, threads);
}

std::vector<TimeSeries> sum_ensembles(std::span<const BootstrapEnsemble> ensembles) {
    if (ensembles.empty()) throw InvalidArgument("sum_ensembles needs at least one ensemble");
    const std::size_t count = ensembles.front().resamples.size();
    std::size_t len = ensembles.front().resamples.front().size();
    for (const auto& e : ensembles) {
        if (e.resamples.size() != count)
            throw InvalidArgument("ensembles differ in resample count (" + std::to_string(e.resamples.size()) +
                                  " vs " + std::to_string(count) + ")");
        for (const auto& r : e.resamples) len = std::min(len, r.size());
    }

    std::vector<TimeSeries> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> acc(len, 0.0);
        for (const auto& e : ensembles) kernels::axpy(1.0, e.resamples[i].values().first(len), acc);
        out.emplace_back(std::move(acc), ensembles.front().resamples[i].t0(), "ensemble_sum");
    }
    return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InvalidArgument("quantile of empty data");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<PhaseInterval> periodic_mean_ci(const BootstrapEnsemble& ensemble, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
    const std::size_t count = ensemble.resamples.size();
    if (count < 20)
        throw InvalidArgument("periodic mean intervals need at least 20 resamples, got " + std::to_string(count));
    const auto& plan = ensemble.plan;

    std::vector<PhaseInterval> out;
    out.reserve(plan.period);
    std::vector<double> phase_means(count);
    for (std::size_t r = 0; r < plan.period; ++r) {
        for (std::size_t b = 0; b < count; ++b) {
            const auto v = ensemble.resamples[b].values();
            double acc = 0.0;
            for (std::size_t blk = 0; blk < plan.n_blocks; ++blk) acc += v[blk * plan.period + r];
            phase_means[b] = acc / static_cast<double>(plan.n_blocks);
        }
        const double mean = kernels::sum(phase_means) / static_cast<double>(count);
        std::sort(phase_means.begin(), phase_means.end());
        const double tail = 0.5 * (1.0 - level);
        double low = quantile_sorted(phase_means, tail);
        double high = quantile_sorted(phase_means, 1.0 - tail);
        out.push_back({r, low, mean, high});
    }
    return out;
}

void write_ci_csv(std::span<const PhaseInterval> ci, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "phase,low,mean,high\n";
    for (const auto& p : ci)
        out << p.phase << ',' << format_double(p.low) << ',' << format_double(p.mean) << ',' << format_double(p.high)
            << '\n';
}

void write_ensemble(const BootstrapEnsemble& ensemble, std::span<const PhaseInterval> ci,
                    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    char name[32];
    for (std::size_t i = 0; i < ensemble.resamples.size(); ++i) {
        std::snprintf(name, sizeof(name), "resample_%04zu.csv", i);
        write_csv(ensemble.resamples[i], dir / name);
    }
    if (!ci.empty()) write_ci_csv(ci, dir / "ci.csv");
}

} // namespace pcdecomp
