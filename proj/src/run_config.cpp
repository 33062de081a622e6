#include "pcdecomp/run_config.hpp"

#include "pcdecomp/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace pcdecomp {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(PhaseMode m) { return m == PhaseMode::zero ? "zero" : "aligned"; }

std::string to_string(FilterMode m) {
    switch (m) {
    case FilterMode::bandwidth: return "bandwidth";
    case FilterMode::fixed: return "fixed";
    case FilterMode::periods_per_window: return "periods_per_window";
    }
    return "bandwidth";
}

namespace {

double parse_plain(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidArgument("not a number: `" + s + "`");
    return v;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config field `") + key + "`: " + e.what());
    }
}

GammaPrior gamma_from_json(const json& j, GammaPrior fallback) {
    return GammaPrior{get_or(j, "shape", fallback.shape), get_or(j, "rate", fallback.rate)};
}

} // namespace

double parse_frequency(const json& value) {
    if (value.is_number()) return value.get<double>();
    if (!value.is_string()) throw InvalidArgument("frequency must be a number or a string such as \"1/12\"");
    const auto s = value.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_plain(s);
    const double num = parse_plain(s.substr(0, slash));
    const double den = parse_plain(s.substr(slash + 1));
    if (den == 0.0) throw InvalidArgument("frequency `" + s + "` divides by zero");
    return num / den;
}

void RunConfig::validate() const {
    if (input.has_value() == simulation.has_value())
        throw InvalidArgument("config needs exactly one of `input` and `simulate`");
    if (!auto_frequencies) {
        if (frequencies.empty()) throw InvalidArgument("config lists no frequencies (use \"auto\" for peak detection)");
        for (std::size_t i = 0; i < frequencies.size(); ++i) {
            if (!(frequencies[i] > 0.0 && frequencies[i] <= 0.5))
                throw InvalidArgument("frequency " + format_double(frequencies[i]) + " outside (0, 0.5]");
            for (std::size_t j = 0; j < i; ++j)
                if (frequencies[i] == frequencies[j])
                    throw InvalidArgument("duplicate frequency " + format_double(frequencies[i]));
        }
        if (filter.mode == FilterMode::fixed && filter.windows.size() != frequencies.size())
            throw InvalidArgument("fixed filter mode needs one window per frequency");
    } else if (max_peaks == 0) {
        throw InvalidArgument("auto frequency detection needs max_peaks >= 1");
    }
    if (filter.iterations < 1) throw InvalidArgument("filter iterations must be >= 1");
    if (resamples < 20) throw InvalidArgument("bootstrap needs at least 20 resamples");
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw InvalidArgument("ci_level must lie in (0, 1)");
    if (!(significance_fraction >= 0.0 && significance_fraction <= 1.0))
        throw InvalidArgument("significance_fraction must lie in [0, 1]");
    mcmc.validate();
    AmplitudeModel probe = prior;
    probe.period = 1.0;
    probe.validate();
}

RunConfig run_config_from_json(const json& root) {
    const json& doc = root.contains("config") && root.at("config").is_object() ? root.at("config") : root;
    RunConfig cfg;
    try {
        if (doc.contains("input") && !doc.at("input").is_null()) cfg.input = doc.at("input").get<std::string>();
        if (doc.contains("simulate") && !doc.at("simulate").is_null()) {
            const auto& s = doc.at("simulate");
            SimulationSpec spec;
            for (const auto& c : s.value("components", json::array()))
                spec.components.emplace_back(c.at("amplitude").get<double>(), c.at("period").get<double>(),
                                             c.value("phase", 0.0));
            spec.noise_sd = get_or(s, "noise_sd", spec.noise_sd);
            spec.n = get_or(s, "n", spec.n);
            spec.t0 = get_or(s, "t0", spec.t0);
            if (s.contains("seed") && !s.at("seed").is_null()) spec.seed = s.at("seed").get<std::uint64_t>();
            cfg.simulation = std::move(spec);
        }

        if (doc.contains("frequencies")) {
            const auto& f = doc.at("frequencies");
            if (f.is_string() && f.get<std::string>() == "auto") {
                cfg.auto_frequencies = true;
            } else if (f.is_array()) {
                for (const auto& v : f) cfg.frequencies.push_back(parse_frequency(v));
            } else {
                throw InvalidArgument("`frequencies` must be \"auto\" or an array");
            }
        }
        if (doc.contains("periods")) {
            for (const auto& v : doc.at("periods")) {
                const double p = v.get<double>();
                if (!(p > 0.0)) throw InvalidArgument("periods must be positive");
                cfg.frequencies.push_back(1.0 / p);
            }
        }
        if (doc.contains("auto")) {
            const auto& a = doc.at("auto");
            cfg.max_peaks = get_or(a, "max_peaks", cfg.max_peaks);
            cfg.min_prominence_ratio = get_or(a, "min_prominence_ratio", cfg.min_prominence_ratio);
        }

        if (doc.contains("filter")) {
            const auto& f = doc.at("filter");
            const auto mode = get_or<std::string>(f, "mode", "bandwidth");
            if (mode == "bandwidth") cfg.filter.mode = FilterMode::bandwidth;
            else if (mode == "fixed") cfg.filter.mode = FilterMode::fixed;
            else if (mode == "periods_per_window") cfg.filter.mode = FilterMode::periods_per_window;
            else throw InvalidArgument("unknown filter mode `" + mode + "`");
            cfg.filter.iterations = get_or(f, "iterations", cfg.filter.iterations);
            cfg.filter.max_sidelobe = get_or(f, "max_sidelobe", cfg.filter.max_sidelobe);
            cfg.filter.windows = get_or(f, "windows", cfg.filter.windows);
            cfg.filter.periods_per_window = get_or(f, "periods_per_window", cfg.filter.periods_per_window);
            cfg.filter.boundary = boundary_from_string(get_or<std::string>(f, "boundary", "renormalize"));
        }

        if (doc.contains("bootstrap")) {
            const auto& b = doc.at("bootstrap");
            cfg.resamples = get_or(b, "resamples", cfg.resamples);
            cfg.ci_level = get_or(b, "ci_level", cfg.ci_level);
            cfg.significance_fraction = get_or(b, "significance_fraction", cfg.significance_fraction);
            cfg.per_resample_mcmc = get_or(b, "per_resample_mcmc", cfg.per_resample_mcmc);
            cfg.export_resamples = get_or(b, "export_resamples", cfg.export_resamples);
        }

        if (doc.contains("mcmc")) {
            const auto& m = doc.at("mcmc");
            cfg.mcmc.iterations = get_or(m, "iterations", cfg.mcmc.iterations);
            cfg.mcmc.burn_in = get_or(m, "burn_in", cfg.mcmc.burn_in);
            cfg.mcmc.init_amplitude = get_or(m, "init_amplitude", cfg.mcmc.init_amplitude);
            cfg.mcmc.init_sigma = get_or(m, "init_sigma", cfg.mcmc.init_sigma);
            cfg.mcmc.proposal_sd_amplitude = get_or(m, "proposal_sd_amplitude", cfg.mcmc.proposal_sd_amplitude);
            cfg.mcmc.proposal_halfwidth_sigma =
                get_or(m, "proposal_halfwidth_sigma", cfg.mcmc.proposal_halfwidth_sigma);
            if (get_or(m, "corrected", false)) cfg.prior.sigma_prior = SigmaPrior::jacobian_corrected;
            if (m.contains("prior_amplitude"))
                cfg.prior.prior_amplitude = gamma_from_json(m.at("prior_amplitude"), cfg.prior.prior_amplitude);
            if (m.contains("prior_variance"))
                cfg.prior.prior_variance = gamma_from_json(m.at("prior_variance"), cfg.prior.prior_variance);
        }

        const auto phase = get_or<std::string>(doc, "phase_mode", "zero");
        if (phase == "zero") cfg.phase_mode = PhaseMode::zero;
        else if (phase == "aligned") cfg.phase_mode = PhaseMode::aligned;
        else throw InvalidArgument("unknown phase_mode `" + phase + "` (expected zero or aligned)");

        cfg.detrend = get_or(doc, "detrend", cfg.detrend);
        cfg.extrapolate_trend = get_or(doc, "extrapolate_trend", cfg.extrapolate_trend);
        cfg.forecast_horizon = get_or(doc, "forecast_horizon", cfg.forecast_horizon);
        cfg.seed = get_or(doc, "seed", cfg.seed);
        cfg.output_dir = get_or(root, "output_dir", cfg.output_dir);
        cfg.threads = get_or(root, "threads", cfg.threads);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed run config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(doc);
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    if (c.input) j["input"] = *c.input;
    if (c.simulation) {
        ordered_json s;
        ordered_json comps = ordered_json::array();
        for (const auto& m : c.simulation->components)
            comps.push_back({{"amplitude", m.amplitude()}, {"period", m.period()}, {"phase", m.phase()}});
        s["components"] = comps;
        s["noise_sd"] = c.simulation->noise_sd;
        s["n"] = c.simulation->n;
        s["t0"] = c.simulation->t0;
        if (c.simulation->seed) s["seed"] = *c.simulation->seed;
        j["simulate"] = s;
    }
    if (c.auto_frequencies) j["frequencies"] = "auto";
    else j["frequencies"] = c.frequencies;
    j["auto"] = {{"max_peaks", c.max_peaks}, {"min_prominence_ratio", c.min_prominence_ratio}};
    j["filter"] = {{"mode", to_string(c.filter.mode)},
                   {"iterations", c.filter.iterations},
                   {"max_sidelobe", c.filter.max_sidelobe},
                   {"windows", c.filter.windows},
                   {"periods_per_window", c.filter.periods_per_window},
                   {"boundary", to_string(c.filter.boundary)}};
    j["bootstrap"] = {{"resamples", c.resamples},
                      {"ci_level", c.ci_level},
                      {"significance_fraction", c.significance_fraction},
                      {"per_resample_mcmc", c.per_resample_mcmc},
                      {"export_resamples", c.export_resamples}};
    j["mcmc"] = {{"iterations", c.mcmc.iterations},
                 {"burn_in", c.mcmc.burn_in},
                 {"init_amplitude", c.mcmc.init_amplitude},
                 {"init_sigma", c.mcmc.init_sigma},
                 {"proposal_sd_amplitude", c.mcmc.proposal_sd_amplitude},
                 {"proposal_halfwidth_sigma", c.mcmc.proposal_halfwidth_sigma},
                 {"corrected", c.prior.sigma_prior == SigmaPrior::jacobian_corrected},
                 {"prior_amplitude", {{"shape", c.prior.prior_amplitude.shape}, {"rate", c.prior.prior_amplitude.rate}}},
                 {"prior_variance", {{"shape", c.prior.prior_variance.shape}, {"rate", c.prior.prior_variance.rate}}}};
    j["phase_mode"] = to_string(c.phase_mode);
    j["detrend"] = c.detrend;
    j["extrapolate_trend"] = c.extrapolate_trend;
    j["forecast_horizon"] = c.forecast_horizon;
    j["seed"] = c.seed;
    return j;
}

} // namespace pcdecomp
