#include "pcdecomp/pipeline.hpp"

#include "pcdecomp/error.hpp"
#include "pcdecomp/kernels.hpp"
#include "pcdecomp/parallel.hpp"
#include "pcdecomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace pcdecomp {

using nlohmann::ordered_json;

TimeSeries reconstruct(const McpFit& fit, std::int64_t t_first, std::int64_t t_last) {
    if (t_last < t_first) throw InvalidArgument("reconstruct needs t_last >= t_first");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t_last - t_first + 1));
    for (std::int64_t t = t_first; t <= t_last; ++t) {
        const std::int64_t trend_t = (!fit.extrapolate_trend && t > fit.t_last) ? fit.t_last : t;
        double v = fit.trend(static_cast<double>(trend_t));
        for (const auto& c : fit.components) {
            if (!c.significant) continue;
            v += c.estimate.mean_amplitude *
                 std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / c.period + c.phase);
        }
        out.push_back(v);
    }
    return TimeSeries(std::move(out), t_first, "reconstruction");
}

ResidualDiagnostics residual_diagnostics(const McpFit& fit, const TimeSeries& input) {
    if (fit.fitted.size() != input.size() || fit.fitted.t0() != input.t0())
        throw InvalidArgument("fit and input cover different time ranges");
    std::vector<double> r(input.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = input[i] - fit.fitted[i];

    auto variance = [](std::span<const double> v) {
        const double mean = kernels::sum(v) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return ss / static_cast<double>(v.size());
    };

    ResidualDiagnostics d;
    d.residual = TimeSeries(std::move(r), input.t0(), "residual");
    d.residual_variance = variance(d.residual.values());
    d.input_variance = variance(input.values());
    d.variance_ratio = d.input_variance > 0.0 ? d.residual_variance / d.input_variance : 0.0;
    if (input.size() >= 4) d.periodogram = periodogram(d.residual);
    return d;
}

std::size_t PipelineRun::significant_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(components.begin(), components.end(), [](const ComponentRun& c) { return c.significant; }));
}

TimeSeries load_input(const RunConfig& config) {
    if (config.input) return read_csv(*config.input);
    if (!config.simulation) throw InvalidArgument("config has neither input nor simulation");
    const auto& s = *config.simulation;
    auto series = simulate_mpc(s.components, s.noise_sd, s.n, s.seed.value_or(config.seed), s.t0);
    series.set_name("simulated");
    return series;
}

namespace {

std::vector<KzftParams> filter_params(const RunConfig& cfg, std::span<const double> freqs, std::size_t n) {
    std::vector<KzftParams> params;
    switch (cfg.filter.mode) {
    case FilterMode::bandwidth:
        return choose_bandwidth(freqs, BandwidthPolicy{cfg.filter.iterations, cfg.filter.max_sidelobe, n});
    case FilterMode::fixed:
        if (cfg.filter.windows.size() != freqs.size())
            throw InvalidArgument("fixed filter mode needs one window per frequency");
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            KzftParams p{cfg.filter.windows[i], cfg.filter.iterations, freqs[i]};
            p.validate();
            params.push_back(p);
        }
        return params;
    case FilterMode::periods_per_window:
        for (double f : freqs) params.push_back(params_from_periods(f, cfg.filter.periods_per_window, cfg.filter.iterations));
        return params;
    }
    return params;
}

ComponentRun run_component(const RunConfig& cfg, const TimeSeries& detrended, double frequency,
                           const KzftParams& params) {
    ComponentRun c;
    c.frequency = frequency;
    c.params = params;
    c.seed = derive_seed(cfg.seed, frequency);
    c.filtered = kzft_apply(detrended, params, cfg.filter.boundary);

    c.block_period = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / frequency)));
    const auto plan = make_block_plan(c.filtered.series.size(), c.block_period);
    auto ensemble = pbb_resample(c.filtered, plan, cfg.resamples, derive_seed(c.seed, std::uint64_t{1}));
    c.ci = periodic_mean_ci(ensemble, cfg.ci_level);
    const auto excluded = std::count_if(c.ci.begin(), c.ci.end(),
                                        [](const PhaseInterval& p) { return p.low > 0.0 || p.high < 0.0; });
    c.zero_excluded_fraction = static_cast<double>(excluded) / static_cast<double>(c.ci.size());
    c.significant = c.zero_excluded_fraction >= cfg.significance_fraction;

    const double period = 1.0 / frequency;
    c.phase = cfg.phase_mode == PhaseMode::aligned ? align_phase(c.filtered.series, period) : 0.0;

    AmplitudeModel model = cfg.prior;
    model.period = period;
    model.phase = c.phase;
    McmcConfig mcmc = cfg.mcmc;
    mcmc.seed = derive_seed(c.seed, std::uint64_t{2});
    c.chain = run_chain(AmplitudePosterior(c.filtered.series, model), mcmc);
    c.estimate = summarize(c.chain);

    if (cfg.per_resample_mcmc) {
        std::vector<double> means;
        means.reserve(ensemble.resamples.size());
        for (std::size_t b = 0; b < ensemble.resamples.size(); ++b) {
            McmcConfig rc = cfg.mcmc;
            rc.seed = derive_seed(c.seed, std::uint64_t{3} + b);
            means.push_back(summarize(run_chain(AmplitudePosterior(ensemble.resamples[b], model), rc)).mean_amplitude);
        }
        const double m = kernels::sum(means) / static_cast<double>(means.size());
        double ss = 0.0;
        for (double v : means) ss += (v - m) * (v - m);
        c.resample_fits = ResampleFitStats{m, std::sqrt(ss / static_cast<double>(means.size() - 1)), means.size()};
    }
    if (cfg.export_resamples) c.ensemble = std::move(ensemble);
    return c;
}

ordered_json manifest_for(const PipelineRun& run) {
    ordered_json m;
    m["tool"] = "pcdecomp";
    m["format"] = 1;
    m["config"] = to_json(run.config);
    m["kernels"] = std::string(kernels::name(kernels::active().isa));
    m["input"] = {{"name", run.input.name()}, {"t0", run.input.t0()}, {"length", run.input.size()}};
    m["trend"] = {{"intercept", run.fit.trend.intercept}, {"slope", run.fit.trend.slope}};
    if (run.config.auto_frequencies) {
        ordered_json peaks = ordered_json::array();
        for (const auto& p : run.detected_peaks) peaks.push_back({{"frequency", p.frequency}, {"power", p.power}});
        m["detected_peaks"] = peaks;
    }
    ordered_json comps = ordered_json::array();
    ordered_json notes = ordered_json::array();
    for (const auto& c : run.components) {
        ordered_json j;
        j["frequency"] = c.frequency;
        j["directory"] = "components/" + component_dir_name(c.frequency);
        j["period"] = 1.0 / c.frequency;
        j["block_period"] = c.block_period;
        j["block_period_rounded"] = std::abs(1.0 / c.frequency - static_cast<double>(c.block_period)) > 1e-9;
        j["filter"] = {{"mode", to_string(run.config.filter.mode)},
                       {"window", c.params.window},
                       {"iterations", c.params.iterations},
                       {"frequency", c.params.frequency},
                       {"boundary", to_string(run.config.filter.boundary)},
                       {"conjugate_gain", kz_transfer(c.params.window, c.params.iterations, 2.0 * c.frequency)}};
        j["seeds"] = {{"component", c.seed},
                      {"bootstrap", derive_seed(c.seed, std::uint64_t{1})},
                      {"mcmc", derive_seed(c.seed, std::uint64_t{2})}};
        j["phase_mode"] = to_string(run.config.phase_mode);
        j["phase"] = c.phase;
        j["zero_excluded_fraction"] = c.zero_excluded_fraction;
        j["significant"] = c.significant;
        j["estimate"] = to_json(c.estimate);
        if (c.resample_fits)
            j["resample_fits"] = {{"mean_amplitude", c.resample_fits->mean_amplitude},
                                  {"sd_amplitude", c.resample_fits->sd_amplitude},
                                  {"count", c.resample_fits->count}};
        if (!c.significant)
            notes.push_back("component " + format_double(c.frequency) +
                            " not significant: bootstrap band excludes zero at " +
                            format_double(c.zero_excluded_fraction) + " of phases; excluded from the fit");
        if (j["block_period_rounded"].get<bool>())
            notes.push_back("component " + format_double(c.frequency) + " block length rounded to " +
                            std::to_string(c.block_period));
        comps.push_back(std::move(j));
    }
    if (run.components.empty()) notes.push_back("no candidate frequencies; fit is the trend only");
    m["components"] = comps;
    m["diagnostics"] = {{"residual_variance", run.diagnostics.residual_variance},
                        {"input_variance", run.diagnostics.input_variance},
                        {"variance_ratio", run.diagnostics.variance_ratio}};
    m["notes"] = notes;
    return m;
}

} // namespace

ordered_json to_json(const AmplitudeEstimate& est) {
    return {{"mean_A", est.mean_amplitude},
            {"sd_A", est.sd_amplitude},
            {"mean_sigma", est.mean_sigma},
            {"sd_sigma", est.sd_sigma},
            {"acceptance_rate", est.acceptance_rate()},
            {"acceptance_rate_A", est.acceptance_rate_amplitude},
            {"acceptance_rate_sigma", est.acceptance_rate_sigma},
            {"ess_A", est.ess_amplitude},
            {"ess_sigma", est.ess_sigma},
            {"kept", est.kept}};
}

PipelineRun run_pipeline(const RunConfig& config) {
    config.validate();
    return run_pipeline(config, load_input(config));
}

PipelineRun run_pipeline(const RunConfig& config, const TimeSeries& input) {
    if (!config.auto_frequencies && config.frequencies.empty())
        throw InvalidArgument("config lists no frequencies");
    PipelineRun run;
    run.config = config;
    run.input = input;

    if (config.detrend) {
        run.detrended = detrend_linear(input);
    } else {
        run.detrended = Detrended{input, TrendLine{}};
    }

    std::vector<double> freqs = config.frequencies;
    if (config.auto_frequencies) {
        run.detected_peaks = find_peaks(periodogram(run.detrended.residual), config.max_peaks, config.min_prominence_ratio);
        freqs.clear();
        for (const auto& p : run.detected_peaks) freqs.push_back(p.frequency);
    }
    std::sort(freqs.begin(), freqs.end());

    if (config.detrend && !freqs.empty()) {
        // At the Nyquist frequency the sine column vanishes on integer t.
        std::vector<double> joint;
        for (double f : freqs)
            if (f < 0.5) joint.push_back(f);
        run.detrended = detrend_linear(input, joint);
    }

    std::vector<KzftParams> params;
    if (!freqs.empty()) {
        RunConfig sorted_cfg = config;
        if (config.filter.mode == FilterMode::fixed) {
            // Windows follow the caller's frequency order.
            std::vector<std::size_t> windows;
            for (double f : freqs) {
                const auto it = std::find(config.frequencies.begin(), config.frequencies.end(), f);
                windows.push_back(config.filter.windows.at(static_cast<std::size_t>(it - config.frequencies.begin())));
            }
            sorted_cfg.filter.windows = windows;
        }
        params = filter_params(sorted_cfg, freqs, run.detrended.residual.size());
    }

    run.components.resize(freqs.size());
    parallel_for(freqs.size(), config.threads, [&](std::size_t i) {
        run.components[i] = run_component(config, run.detrended.residual, freqs[i], params[i]);
    });

    McpFit& fit = run.fit;
    fit.trend = run.detrended.trend;
    fit.extrapolate_trend = config.extrapolate_trend;
    fit.t_first = input.t0();
    fit.t_last = input.last_time();
    for (const auto& c : run.components)
        fit.components.push_back({c.frequency, 1.0 / c.frequency, c.phase, c.estimate, c.significant});
    fit.fitted = reconstruct(fit, fit.t_first, fit.t_last);
    if (config.forecast_horizon > 0)
        fit.forecast = reconstruct(fit, fit.t_last + 1, fit.t_last + static_cast<std::int64_t>(config.forecast_horizon));

    run.diagnostics = residual_diagnostics(fit, input);
    run.manifest = manifest_for(run);
    return run;
}

std::string component_dir_name(double frequency) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "f%.8f", frequency);
    return buf;
}

void write_run_directory(const PipelineRun& run, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "components");
    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
        out << run.manifest.dump(2) << '\n';
    }
    write_csv(run.fit.fitted, dir / "fit.csv");
    {
        std::ofstream out(dir / "forecast.csv", std::ios::binary);
        if (run.fit.forecast) write_csv(*run.fit.forecast, out);
        else out << "t,value\n";
    }
    write_csv(run.diagnostics.residual, dir / "residuals.csv");
    if (run.detrended.residual.size() >= 4) write_periodogram_csv(periodogram(run.detrended.residual), dir / "periodogram.csv");

    for (const auto& c : run.components) {
        const fs::path cdir = dir / "components" / component_dir_name(c.frequency);
        fs::create_directories(cdir);
        write_csv(c.filtered.series, cdir / "filtered.csv");
        write_filter_manifest(c.filtered, cdir / "filtered.json");
        write_ci_csv(c.ci, cdir / "ci.csv");
        write_chain_csv(c.chain, cdir / "chain.csv");
        if (c.ensemble) write_ensemble(*c.ensemble, {}, cdir / "resamples");

        ordered_json s;
        s["frequency"] = c.frequency;
        s["period"] = 1.0 / c.frequency;
        s["phase"] = c.phase;
        s["significant"] = c.significant;
        s["estimate"] = to_json(c.estimate);
        s["mcmc"] = to_json(run.config)["mcmc"];
        s["seed"] = derive_seed(c.seed, std::uint64_t{2});
        std::ofstream out(cdir / "summary.json", std::ios::binary);
        if (!out) throw Error("cannot write " + (cdir / "summary.json").string());
        out << s.dump(2) << '\n';
    }
}

} // namespace pcdecomp
