// pcdecomp: command-line front end.
//
// Exit codes: 0 ok, 2 usage or invalid input, 3 unseparable frequencies,
// 4 no significant component. Failures print one `error=<kind> ...` line on
// stderr.

#include "pcdecomp/amplitude_mcmc.hpp"
#include "pcdecomp/bootstrap.hpp"
#include "pcdecomp/error.hpp"
#include "pcdecomp/kzft.hpp"
#include "pcdecomp/pipeline.hpp"
#include "pcdecomp/run_config.hpp"
#include "pcdecomp/spectral.hpp"
#include "pcdecomp/svg_plot.hpp"
#include "pcdecomp/time_series.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace pcdecomp;

constexpr int kExitUsage = 2;
constexpr int kExitUnseparable = 3;
constexpr int kExitNothingSignificant = 4;

struct UsageError : Error {
    using Error::Error;
};

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '"') c = c == '"' ? '\'' : ' ';
    return s;
}

// Explicit flag, then PCDECOMP_SEED, then the fallback.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
    if (flag) return *flag;
    if (const char* env = std::getenv("PCDECOMP_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("PCDECOMP_SEED is not an unsigned integer: `") + env + "`");
    }
    return fallback;
}

double parse_frequency_text(const std::string& text) { return parse_frequency(nlohmann::json(text)); }

SinusoidModel parse_component(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw UsageError("--comp expects A,p[,phi], got `" + spec + "`");
        }
    }
    if (parts.size() < 2 || parts.size() > 3) throw UsageError("--comp expects A,p[,phi], got `" + spec + "`");
    return SinusoidModel(parts[0], parts[1], parts.size() == 3 ? parts[2] : 0.0);
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::vector<std::string> comps;
    double noise_sd = 10.0;
    long long n = 300;
    std::optional<std::uint64_t> seed;
    std::int64_t t0 = 1;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
    if (a.n <= 0) throw UsageError("--n must be a positive integer");
    std::vector<SinusoidModel> comps;
    for (const auto& c : a.comps) comps.push_back(parse_component(c));
    const auto seed = resolve_seed(a.seed, 1);
    const auto series = simulate_mpc(comps, a.noise_sd, static_cast<std::size_t>(a.n), seed, a.t0);
    write_csv(series, a.out);
    std::cout << "simulated n=" << series.size() << " components=" << comps.size()
              << " noise_sd=" << format_double(a.noise_sd) << " seed=" << seed << " out=" << a.out << '\n';
    return 0;
}

// ------------------------------------------------------------- periodogram

struct PeriodogramArgs {
    std::string in;
    std::string out;
    std::size_t peaks = 0;
    double ratio = 10.0;
    bool detrend = false;
};

int cmd_periodogram(const PeriodogramArgs& a) {
    auto series = read_csv(a.in);
    if (a.detrend) series = detrend_linear(series).residual;
    const auto pg = periodogram(series);
    if (!a.out.empty()) write_periodogram_csv(pg, a.out);
    if (a.peaks > 0) {
        for (const auto& p : find_peaks(pg, a.peaks, a.ratio))
            std::cout << "peak frequency=" << format_double(p.frequency) << " period=" << format_double(1.0 / p.frequency)
                      << " power=" << format_double(p.power) << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------ filter

struct FilterArgs {
    std::string in;
    std::string out;
    std::string freq;
    double period = 0.0;
    std::size_t window = 0;
    double periods_per_window = 0.0;
    std::size_t iterations = 3;
    double max_sidelobe = 0.01;
    std::string boundary = "renormalize";
    bool detrend = false;
};

int cmd_filter(const FilterArgs& a) {
    double nu = 0.0;
    if (!a.freq.empty() && a.period > 0.0) throw UsageError("give either --freq or --period");
    if (!a.freq.empty()) nu = parse_frequency_text(a.freq);
    else if (a.period > 0.0) nu = 1.0 / a.period;
    else throw UsageError("one of --freq or --period is required");

    auto series = read_csv(a.in);
    if (a.detrend) series = detrend_linear(series).residual;
    KzftParams params;
    if (a.window > 0 && a.periods_per_window > 0.0) throw UsageError("give either --window or --periods-per-window");
    if (a.window > 0) {
        params = KzftParams{a.window, a.iterations, nu};
        params.validate();
    } else if (a.periods_per_window > 0.0) {
        params = params_from_periods(nu, a.periods_per_window, a.iterations);
    } else {
        const double f[] = {nu};
        params = choose_bandwidth(f, BandwidthPolicy{a.iterations, a.max_sidelobe, series.size()}).front();
    }
    const auto filtered = kzft_apply(series, params, boundary_from_string(a.boundary));
    write_csv(filtered.series, a.out);
    write_filter_manifest(filtered, sidecar_path(a.out));
    std::cout << "filtered frequency=" << format_double(nu) << " window=" << params.window
              << " iterations=" << params.iterations << " boundary=" << a.boundary << " out=" << a.out << '\n';
    return 0;
}

// --------------------------------------------------------------- bootstrap

struct BootstrapArgs {
    std::string in;
    std::string out_dir;
    std::size_t period = 0;
    std::size_t resamples = 200;
    std::optional<std::uint64_t> seed;
    double level = 0.95;
    std::size_t threads = 0;
};

int cmd_bootstrap(const BootstrapArgs& a) {
    const auto series = read_csv(a.in);
    const auto plan = make_block_plan(series.size(), a.period);
    const auto seed = resolve_seed(a.seed, 1);
    const auto ensemble = pbb_resample(series, plan, a.resamples, seed, a.threads);
    std::vector<PhaseInterval> ci;
    if (a.resamples >= 20) ci = periodic_mean_ci(ensemble, a.level);
    write_ensemble(ensemble, ci, a.out_dir);
    std::cout << "bootstrap period=" << plan.period << " blocks=" << plan.n_blocks << " resamples=" << a.resamples
              << " seed=" << seed << " out=" << a.out_dir << '\n';
    return 0;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    std::string in;
    std::string freq;
    double period = 0.0;
    double phase = 0.0;
    bool align = false;
    bool corrected = false;
    McmcConfig mcmc;
    std::optional<std::uint64_t> seed;
    std::string chain_out;
    std::string summary_out;
};

int cmd_fit(FitArgs a) {
    double p = 0.0;
    if (!a.freq.empty() && a.period > 0.0) throw UsageError("give either --freq or --period");
    if (!a.freq.empty()) p = 1.0 / parse_frequency_text(a.freq);
    else if (a.period > 0.0) p = a.period;
    else throw UsageError("one of --freq or --period is required");

    const auto data = read_csv(a.in);
    AmplitudeModel model;
    model.period = p;
    model.phase = a.align ? align_phase(data, p) : a.phase;
    model.sigma_prior = a.corrected ? SigmaPrior::jacobian_corrected : SigmaPrior::literal;
    a.mcmc.seed = resolve_seed(a.seed, 1);

    const auto chain = run_chain(AmplitudePosterior(data, model), a.mcmc);
    const auto est = summarize(chain);
    if (!a.chain_out.empty()) write_chain_csv(chain, a.chain_out);
    if (!a.summary_out.empty()) {
        nlohmann::ordered_json s;
        s["period"] = p;
        s["phase"] = model.phase;
        s["corrected"] = a.corrected;
        s["estimate"] = to_json(est);
        s["mcmc"] = {{"iterations", a.mcmc.iterations},
                     {"burn_in", a.mcmc.burn_in},
                     {"init_amplitude", a.mcmc.init_amplitude},
                     {"init_sigma", a.mcmc.init_sigma},
                     {"proposal_sd_amplitude", a.mcmc.proposal_sd_amplitude},
                     {"proposal_halfwidth_sigma", a.mcmc.proposal_halfwidth_sigma}};
        s["seed"] = a.mcmc.seed;
        std::ofstream out(a.summary_out, std::ios::binary);
        out << s.dump(2) << '\n';
    }
    std::cout << "fit period=" << format_double(p) << " mean_A=" << format_double(est.mean_amplitude)
              << " sd_A=" << format_double(est.sd_amplitude) << " mean_sigma=" << format_double(est.mean_sigma)
              << " acceptance=" << format_double(est.acceptance_rate()) << '\n';
    return 0;
}

// ---------------------------------------------------------------- pipeline

struct PipelineArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

int cmd_pipeline(const PipelineArgs& a) {
    auto cfg = load_run_config(a.config);
    cfg.seed = resolve_seed(a.seed, cfg.seed);
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.threads) cfg.threads = *a.threads;
    // Relative input paths resolve against the config file location.
    if (cfg.input && std::filesystem::path(*cfg.input).is_relative() && !std::filesystem::exists(*cfg.input)) {
        const auto alt = std::filesystem::path(a.config).parent_path() / *cfg.input;
        if (std::filesystem::exists(alt)) cfg.input = alt.string();
    }
    cfg.validate();
    const auto run = run_pipeline(cfg);
    write_run_directory(run, cfg.output_dir);
    for (const auto& c : run.components)
        std::cout << "component frequency=" << format_double(c.frequency) << " window=" << c.params.window
                  << " mean_A=" << format_double(c.estimate.mean_amplitude)
                  << " sd_A=" << format_double(c.estimate.sd_amplitude)
                  << " significant=" << (c.significant ? "yes" : "no") << '\n';
    std::cout << "run directory " << cfg.output_dir << '\n';
    if (run.significant_count() == 0) {
        std::cerr << "error=no_significant_components components=" << run.components.size() << '\n';
        return kExitNothingSignificant;
    }
    return 0;
}

// -------------------------------------------------------------------- plot

struct PlotArgs {
    std::string kind = "series";
    std::vector<std::string> inputs;
    std::string out;
    std::string title;
    std::string column = "A";
};

int cmd_plot(const PlotArgs& a) {
    PlotSpec spec;
    spec.kind = plot_kind_from_string(a.kind);
    for (const auto& p : a.inputs) spec.inputs.emplace_back(p);
    spec.output = a.out;
    spec.title = a.title;
    spec.column = a.column;
    render_plot(spec);
    std::cout << "plot kind=" << a.kind << " out=" << a.out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pcdecomp: periodic component separation, bootstrap and Bayesian amplitude fitting"};
    app.require_subcommand(1);
    int status = 0;

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a sum of sinusoids plus Gaussian noise");
    s->add_option("--comp", sim.comps, "Component A,p[,phi] (repeatable)");
    s->add_option("--noise-sd", sim.noise_sd, "Noise standard deviation")->capture_default_str();
    s->add_option("--n", sim.n, "Number of observations")->capture_default_str();
    s->add_option("--seed", sim.seed, "RNG seed (default: $PCDECOMP_SEED or 1)");
    s->add_option("--t0", sim.t0, "Time index of the first observation")->capture_default_str();
    s->add_option("--out", sim.out, "Output CSV")->required();
    s->callback([&] { status = cmd_simulate(sim); });

    PeriodogramArgs pga;
    auto* pg = app.add_subcommand("periodogram", "Periodogram at the Fourier frequencies");
    pg->add_option("--in", pga.in, "Input CSV (t,value)")->required();
    pg->add_option("--out", pga.out, "Output CSV (freq,power)");
    pg->add_option("--peaks", pga.peaks, "Report up to this many peaks")->capture_default_str();
    pg->add_option("--ratio", pga.ratio, "Minimum peak power relative to the median")->capture_default_str();
    pg->add_flag("--detrend", pga.detrend, "Remove the least-squares line first");
    pg->callback([&] { status = cmd_periodogram(pga); });

    FilterArgs fa;
    auto* fl = app.add_subcommand("filter", "KZFT band-pass filter around one frequency");
    fl->add_option("--in", fa.in, "Input CSV (t,value)")->required();
    fl->add_option("--out", fa.out, "Output CSV; the JSON sidecar is written next to it")->required();
    fl->add_option("--freq", fa.freq, "Centre frequency, e.g. 0.0666 or 1/15");
    fl->add_option("--period", fa.period, "Centre period (alternative to --freq)");
    fl->add_option("--window", fa.window, "Window length m (odd)");
    fl->add_option("--periods-per-window", fa.periods_per_window, "Window as a number of periods");
    fl->add_option("--k", fa.iterations, "Iterations k")->capture_default_str();
    fl->add_option("--max-sidelobe", fa.max_sidelobe, "Sidelobe bound for automatic window choice")->capture_default_str();
    fl->add_option("--boundary", fa.boundary, "renormalize or trim")->capture_default_str();
    fl->add_flag("--detrend", fa.detrend, "Remove the least-squares line first");
    fl->callback([&] { status = cmd_filter(fa); });

    BootstrapArgs ba;
    auto* bs = app.add_subcommand("bootstrap", "Periodic block bootstrap of one component");
    bs->add_option("--in", ba.in, "Input CSV (t,value)")->required();
    bs->add_option("--out-dir", ba.out_dir, "Directory for resample_*.csv and ci.csv")->required();
    bs->add_option("--period", ba.period, "Block length (integer period)")->required();
    bs->add_option("--resamples", ba.resamples, "Number of resamples B")->capture_default_str();
    bs->add_option("--seed", ba.seed, "RNG seed (default: $PCDECOMP_SEED or 1)");
    bs->add_option("--level", ba.level, "Interval level for ci.csv")->capture_default_str();
    bs->add_option("--threads", ba.threads, "Worker threads (0 = all cores)")->capture_default_str();
    bs->callback([&] { status = cmd_bootstrap(ba); });

    FitArgs fit;
    auto* ft = app.add_subcommand("fit", "Metropolis-Hastings amplitude fit of one filtered component");
    ft->add_option("--in", fit.in, "Filtered component CSV (t,value)")->required();
    ft->add_option("--freq", fit.freq, "Component frequency");
    ft->add_option("--period", fit.period, "Component period (alternative to --freq)");
    ft->add_option("--phase", fit.phase, "Fixed phase in radians")->capture_default_str();
    ft->add_flag("--align-phase", fit.align, "Estimate the phase by a 256-point scan");
    ft->add_flag("--corrected", fit.corrected, "Add the log-Jacobian of the sigma^2 prior");
    ft->add_option("--iterations", fit.mcmc.iterations, "Chain length")->capture_default_str();
    ft->add_option("--burn-in", fit.mcmc.burn_in, "Discarded initial samples")->capture_default_str();
    ft->add_option("--init-A", fit.mcmc.init_amplitude, "Initial amplitude")->capture_default_str();
    ft->add_option("--init-sigma", fit.mcmc.init_sigma, "Initial sigma")->capture_default_str();
    ft->add_option("--proposal-sd-A", fit.mcmc.proposal_sd_amplitude, "Random-walk sd for A")->capture_default_str();
    ft->add_option("--proposal-halfwidth-sigma", fit.mcmc.proposal_halfwidth_sigma, "Uniform step half-width for sigma")
        ->capture_default_str();
    ft->add_option("--seed", fit.seed, "RNG seed (default: $PCDECOMP_SEED or 1)");
    ft->add_option("--chain-out", fit.chain_out, "Chain CSV (iter,A,sigma,accepted_A,accepted_sigma)");
    ft->add_option("--summary-out", fit.summary_out, "Summary JSON");
    ft->callback([&] { status = cmd_fit(fit); });

    PipelineArgs pa;
    auto* pl = app.add_subcommand("pipeline", "Run the full decomposition from a JSON config");
    pl->add_option("--config", pa.config, "Run config or manifest JSON")->required();
    pl->add_option("--out", pa.out, "Run directory (overrides output_dir)");
    pl->add_option("--seed", pa.seed, "Master seed (overrides config and $PCDECOMP_SEED)");
    pl->add_option("--threads", pa.threads, "Worker threads (0 = all cores)");
    pl->callback([&] { status = cmd_pipeline(pa); });

    PlotArgs pla;
    auto* pt = app.add_subcommand("plot", "Write an SVG plot");
    pt->add_option("--kind", pla.kind, "series, periodogram, trace or overlay")->capture_default_str();
    pt->add_option("--in", pla.inputs, "Input file (repeatable for overlay)")->required();
    pt->add_option("--out", pla.out, "Output SVG")->required();
    pt->add_option("--title", pla.title, "Plot title");
    pt->add_option("--column", pla.column, "Chain column for trace plots")->capture_default_str();
    pt->callback([&] { status = cmd_plot(pla); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error=usage message=\"" << one_line(e.what()) << "\"\n";
        std::cerr << app.help();
        return kExitUsage;
    } catch (const UnseparableError& e) {
        std::cerr << "error=unseparable first=" << format_double(e.first()) << " second=" << format_double(e.second())
                  << " message=\"" << one_line(e.what()) << "\"\n";
        return kExitUnseparable;
    } catch (const UsageError& e) {
        std::cerr << "error=usage message=\"" << one_line(e.what()) << "\"\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error=invalid_argument message=\"" << one_line(e.what()) << "\"\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error=parse message=\"" << one_line(e.what()) << "\"\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error=input message=\"" << one_line(e.what()) << "\"\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error=runtime message=\"" << one_line(e.what()) << "\"\n";
        return 1;
    }
    return status;
}
