// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any gating criterion fails; tracked criteria are reported only.

#include "pcdecomp/amplitude_mcmc.hpp"
#include "pcdecomp/bootstrap.hpp"
#include "pcdecomp/kzft.hpp"
#include "pcdecomp/pipeline.hpp"
#include "pcdecomp/rng.hpp"
#include "pcdecomp/spectral.hpp"
#include "pcdecomp/time_series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pcdecomp;

namespace {

// Tolerances.
constexpr double kRecoveryLo1 = 4.5, kRecoveryHi1 = 5.5;
constexpr double kRecoveryLo2 = 9.0, kRecoveryHi2 = 11.0;
constexpr int kSeeds = 10;
constexpr int kSeedsRequired = 9;
constexpr double kRuntimeLimitSeconds = 10.0;
constexpr double kOracleSigmas = 3.0;
constexpr double kCentreGainTol = 0.02;
constexpr double kOffCentreGainTol = 0.05;
constexpr double kOffCentreMinGain = 0.01;
constexpr double kCoefSumTol = 1e-12;
constexpr double kPeakPower = 1875.0;
constexpr double kPeriodogramRelTol = 1e-6;
constexpr double kMilkReference = 17.63;
constexpr double kMilkFactor = 2.0;
constexpr double kRmseFraction = 0.05;
constexpr double kResidualPeakRatio = 10.0;

int gating_failures = 0;

void report(bool gating, bool pass, const std::string& name, const std::string& detail) {
    const char* tag = gating ? (pass ? "PASS" : "FAIL") : (pass ? "TRACKED-PASS" : "TRACKED-FAIL");
    std::printf("[%s] %s: %s\n", tag, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (gating && !pass) ++gating_failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

RunConfig simulated(std::vector<SinusoidModel> comps, double noise_sd, std::vector<double> freqs, std::uint64_t seed) {
    RunConfig cfg;
    SimulationSpec sim;
    sim.components = std::move(comps);
    sim.noise_sd = noise_sd;
    sim.n = 300;
    cfg.simulation = sim;
    cfg.frequencies = std::move(freqs);
    cfg.seed = seed;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void single_component_recovery() {
    int hits = 0;
    std::string means;
    const auto start = std::chrono::steady_clock::now();
    for (int s = 1; s <= kSeeds; ++s) {
        const auto run = run_pipeline(simulated({{5, 15, 0}}, 10.0, {1.0 / 15}, static_cast<std::uint64_t>(s)));
        const double a = run.components.at(0).estimate.mean_amplitude;
        hits += (a >= kRecoveryLo1 && a <= kRecoveryHi1) ? 1 : 0;
        means += (means.empty() ? "" : " ") + fmt("%.3f", a);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(true, hits >= kSeedsRequired && secs < kRuntimeLimitSeconds, "single-component recovery",
           std::to_string(hits) + "/" + std::to_string(kSeeds) + " seeds with mean A in [4.5, 5.5] (need " +
               std::to_string(kSeedsRequired) + "); means " + means + "; runtime " + fmt("%.2f", secs) + " s");
}

void double_component_recovery() {
    int hits = 0;
    std::string means;
    for (int s = 1; s <= kSeeds; ++s) {
        const auto run = run_pipeline(
            simulated({{5, 15, 0}, {10, 50, 0}}, 10.0, {1.0 / 15, 1.0 / 50}, static_cast<std::uint64_t>(s)));
        // Components are in frequency order: 1/50 first.
        const double a2 = run.components.at(0).estimate.mean_amplitude;
        const double a1 = run.components.at(1).estimate.mean_amplitude;
        const bool ok = a1 >= kRecoveryLo1 && a1 <= kRecoveryHi1 && a2 >= kRecoveryLo2 && a2 <= kRecoveryHi2;
        hits += ok ? 1 : 0;
        means += (means.empty() ? "" : " ") + fmt("(%.3f", a1) + fmt(",%.3f)", a2);
    }
    report(true, hits >= kSeedsRequired, "double-component recovery",
           std::to_string(hits) + "/" + std::to_string(kSeeds) +
               " seeds with A1 in [4.5, 5.5] and A2 in [9, 11] (need " + std::to_string(kSeedsRequired) +
               "); (A1,A2) " + means);
}

void sampler_matches_oracle() {
    const auto data = read_csv(std::filesystem::path(PCDECOMP_FIXTURE_DIR) / "mcmc_n60.csv");
    bool all = true;
    std::string detail;
    for (auto mode : {SigmaPrior::literal, SigmaPrior::jacobian_corrected}) {
        AmplitudeModel model;
        model.period = 15.0;
        model.sigma_prior = mode;
        const AmplitudePosterior post(data, model);
        const auto [ga, gs] = default_oracle_grids(post);
        const auto oracle = posterior_oracle(post, ga, gs);

        McmcConfig cfg;
        cfg.iterations = 40000;
        cfg.burn_in = 2000;
        cfg.seed = 20240601;
        const auto est = summarize(run_chain(post, cfg));

        const double qa = std::abs(oracle.mean_amplitude - oracle.coarse_mean_amplitude);
        const double qs = std::abs(oracle.mean_sigma - oracle.coarse_mean_sigma);
        const double se_a = std::hypot(est.mcse_amplitude(), qa);
        const double se_s = std::hypot(est.mcse_sigma(), qs);
        const double za = std::abs(est.mean_amplitude - oracle.mean_amplitude) / se_a;
        const double zs = std::abs(est.mean_sigma - oracle.mean_sigma) / se_s;
        const bool ok = oracle.converged && za <= kOracleSigmas && zs <= kOracleSigmas;
        all = all && ok;
        detail += std::string(mode == SigmaPrior::literal ? "literal" : "corrected") + " A " +
                  fmt("%.4f", est.mean_amplitude) + " vs " + fmt("%.4f", oracle.mean_amplitude) + " (" +
                  fmt("%.2f", za) + " SE), sigma " + fmt("%.4f", est.mean_sigma) + " vs " +
                  fmt("%.4f", oracle.mean_sigma) + " (" + fmt("%.2f", zs) + " SE)" +
                  (oracle.converged ? "" : " [oracle not converged]") + "; ";
    }
    report(true, all, "sampler vs quadrature oracle", detail + "limit 3 SE");
}

// Least-squares amplitude of a sinusoid at frequency f over [lo, hi).
double fitted_amplitude(std::span<const double> y, double f, std::size_t lo, std::size_t hi) {
    double cc = 0, ss = 0, cs = 0, yc = 0, ys = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double w = 2 * std::numbers::pi * f * static_cast<double>(i + 1);
        const double c = std::cos(w), s = std::sin(w);
        cc += c * c;
        ss += s * s;
        cs += c * s;
        yc += y[i] * c;
        ys += y[i] * s;
    }
    const double det = cc * ss - cs * cs;
    const double a = (yc * ss - ys * cs) / det;
    const double b = (ys * cc - yc * cs) / det;
    return std::hypot(a, b);
}

void kzft_gain() {
    Engine rng(4242);
    std::uniform_real_distribution<double> centre(0.02, 0.4);
    std::uniform_real_distribution<double> offset(-3.0, 3.0);
    std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
    double worst_centre = 0, worst_off = 0;
    std::size_t off_checked = 0, off_failed = 0;
    constexpr std::size_t n = 2000;
    for (int c = 0; c < 25; ++c) {
        const double nu = centre(rng);
        const double fs[] = {nu};
        const auto p = choose_bandwidth(fs, BandwidthPolicy{3, 0.01, 0});
        const std::size_t h = p[0].half_width();
        auto measure = [&](double f) {
            std::vector<double> x(n);
            const double ph = phase(rng);
            for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * std::numbers::pi * f * static_cast<double>(i + 1) + ph);
            const auto y = kzft_apply(TimeSeries(x), p[0]);
            return fitted_amplitude(y.series.values(), f, h, n - h);
        };
        worst_centre = std::max(worst_centre, std::abs(measure(nu) - transfer_gain(p[0], nu)));
        for (int k = 0; k < 4; ++k) {
            const double f = nu + offset(rng) / static_cast<double>(p[0].window);
            if (!(f > 0.0 && f < 0.5)) continue;
            const double predicted = transfer_gain(p[0], f);
            if (predicted < kOffCentreMinGain) continue;
            // A real sinusoid also passes through the image band at -f; its gain
            // T(f + nu) bounds the extra deviation.
            const double leak = kz_transfer(p[0].window, p[0].iterations, f + nu);
            const double err = std::abs(measure(f) - predicted);
            ++off_checked;
            off_failed += err > kOffCentreGainTol * predicted + leak ? 1 : 0;
            worst_off = std::max(worst_off, std::max(0.0, err - leak) / predicted);
        }
    }
    report(true, worst_centre <= kCentreGainTol && off_failed == 0, "KZFT gain",
           "25 centres: worst centre gain error " + fmt("%.4f", worst_centre) + " (limit 0.02); off-centre " +
               std::to_string(off_checked - off_failed) + "/" + std::to_string(off_checked) +
               " within 5% plus image leak, worst leak-adjusted relative error " + fmt("%.4f", worst_off));
}

void coefficient_exactness() {
    const auto c = kzft_coefficients(3, 2);
    const double expect[] = {1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9};
    bool exact = c.size() == 5;
    for (std::size_t i = 0; exact && i < 5; ++i) exact = c[i] == expect[i] && c[i] * 9.0 == std::round(c[i] * 9.0);
    double worst = 0;
    for (std::size_t m = 3; m <= 51; m += 2)
        for (std::size_t k = 1; k <= 5; ++k) {
            double s = 0;
            for (double x : kzft_coefficients(m, k)) s += x;
            worst = std::max(worst, std::abs(s - 1.0));
        }
    report(true, exact && worst <= kCoefSumTol, "KZFT coefficient exactness",
           std::string("(3,2) ") + (exact ? "equals" : "differs from") +
               " [1,2,3,2,1]/9; worst |sum-1| over odd 3<=m<=51, k<=5 is " + fmt("%.2e", worst));
}

void bootstrap_structure() {
    const std::vector<SinusoidModel> comps{{5, 15, 0}};
    const auto src = simulate_mpc(comps, 10.0, 300, 99);
    const auto plan = make_block_plan(300, 15);
    const auto ens = pbb_resample(src, plan, 1000, 7);
    std::size_t bad = 0;
    for (const auto& r : ens.resamples) {
        bool ok = r.size() == plan.trimmed_len && r.t0() == src.t0();
        for (std::size_t slot = 0; ok && slot < plan.n_blocks; ++slot) {
            // Contiguity: the slot is one whole source block.
            const auto first = r[slot * 15];
            std::size_t from = plan.n_blocks;
            for (std::size_t b = 0; b < plan.n_blocks; ++b)
                if (src[b * 15] == first) from = b;
            ok = from < plan.n_blocks;
            for (std::size_t j = 0; ok && j < 15; ++j) {
                ok = r[slot * 15 + j] == src[from * 15 + j];
                // Phase class: the value's source index has the same residue mod p.
                ok = ok && (from * 15 + j) % 15 == (slot * 15 + j) % 15;
            }
        }
        bad += ok ? 0 : 1;
    }
    report(true, bad == 0, "bootstrap block structure",
           std::to_string(1000 - bad) + "/1000 resamples keep whole blocks at their phase");
}

void periodogram_values() {
    const std::vector<SinusoidModel> comps{{5, 15, 0}};
    const auto s = simulate_mpc(comps, 0.0, 300, 1);
    const auto pg = periodogram(s);
    // Direct-sum oracle at j = 20.
    long double re = 0, im = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        const long double w = 2.0L * std::numbers::pi_v<long double> * 20.0L * static_cast<long double>(i + 1) / 300.0L;
        re += s[i] * std::cos(w);
        im -= s[i] * std::sin(w);
    }
    const double oracle = static_cast<double>((re * re + im * im) / 300.0L);
    const double rel_peak = std::abs(pg.power[19] - kPeakPower) / kPeakPower;
    const double rel_oracle = std::abs(pg.power[19] - oracle) / oracle;

    double worst = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        Engine rng(1000 + k);
        std::normal_distribution<double> d(0.0, 1.0 + static_cast<double>(k));
        const std::size_t n = 50 + 17 * k;
        std::vector<double> v(n);
        double mean = 0;
        for (auto& x : v) mean += (x = d(rng));
        mean /= static_cast<double>(n);
        double energy = 0;
        for (auto& x : v) energy += (x -= mean) * x;
        const auto p = periodogram(TimeSeries(v));
        double total = 0;
        for (std::size_t j = 0; j < p.power.size(); ++j)
            total += (n % 2 == 0 && j + 1 == n / 2) ? p.power[j] : 2 * p.power[j];
        worst = std::max(worst, std::abs(total - energy) / energy);
    }
    report(true, rel_peak <= kPeriodogramRelTol && rel_oracle <= kPeriodogramRelTol && worst <= kPeriodogramRelTol,
           "periodogram values",
           "peak " + fmt("%.9f", pg.power[19]) + " (rel err " + fmt("%.1e", rel_peak) + " vs 1875, " +
               fmt("%.1e", rel_oracle) + " vs direct sum); worst Parseval rel err " + fmt("%.1e", worst) +
               " over 20 series");
}

void milk_application() {
    RunConfig cfg;
    cfg.input = (std::filesystem::path(PCDECOMP_DATA_DIR) / "milk.csv").string();
    cfg.frequencies = {1.0 / 12, 2.0 / 12};
    cfg.phase_mode = PhaseMode::aligned;
    const auto run = run_pipeline(cfg);
    const double a1 = run.components.at(0).estimate.mean_amplitude;
    const double a2 = run.components.at(1).estimate.mean_amplitude;
    const bool order = a1 > a2 && a2 > 0.0;
    const bool scale = a1 >= kMilkReference / kMilkFactor && a1 <= kMilkReference * kMilkFactor;
    report(false, order && scale, "milk application",
           "A(1/12) " + fmt("%.3f", a1) + ", A(2/12) " + fmt("%.3f", a2) + "; ordering " + (order ? "ok" : "violated") +
               "; A(1/12) within factor 2 of 17.63: " + (scale ? "yes" : "no"));
}

void determinism() {
    const auto root = std::filesystem::temp_directory_path() / ("pcdecomp_acceptance_" + std::to_string(std::random_device{}()));
    auto cfg = simulated({{5, 15, 0}, {10, 50, 0}}, 10.0, {1.0 / 15, 1.0 / 50}, 11);
    cfg.forecast_horizon = 10;
    write_run_directory(run_pipeline(cfg), root / "seed");
    const auto manifest = load_run_config(root / "seed" / "manifest.json");
    write_run_directory(run_pipeline(manifest), root / "a");
    auto threaded = manifest;
    threaded.threads = 4;
    write_run_directory(run_pipeline(threaded), root / "b");

    std::size_t files = 0, differing = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(e.path(), root / "a");
        ++files;
        if (slurp(e.path()) != slurp(root / "b" / rel)) ++differing;
    }
    std::size_t files_b = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root / "b")) files_b += e.is_regular_file();
    std::error_code ec;
    std::filesystem::remove_all(root, ec);
    report(true, files > 0 && differing == 0 && files == files_b, "determinism",
           std::to_string(files) + " files compared, " + std::to_string(differing) + " differ");
}

void reconstruction_quality() {
    const auto cfg = simulated({{5, 15, 0}, {10, 50, 0}}, 0.0, {1.0 / 15, 1.0 / 50}, 1);
    const auto run = run_pipeline(cfg);
    const auto x = load_input(cfg);
    double se = 0, sx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = run.fit.fitted[i] - x[i];
        se += d * d;
        sx += x[i] * x[i];
    }
    const double ratio = std::sqrt(se / sx);
    const auto& pg = *run.diagnostics.periodogram;
    const double med = median(pg.power);
    double worst_peak = 0;
    for (double f : {1.0 / 15, 1.0 / 50}) {
        const auto j = static_cast<std::size_t>(std::lround(f * static_cast<double>(pg.n))) - 1;
        worst_peak = std::max(worst_peak, med > 0 ? pg.power[j] / med : INFINITY);
    }
    report(true, ratio < kRmseFraction && worst_peak < kResidualPeakRatio, "reconstruction quality",
           "RMSE/RMS " + fmt("%.5f", ratio) + " (limit 0.05); residual power at fitted frequencies / median " +
               fmt("%.3g", worst_peak) + " (limit 10), median " + fmt("%.3g", med));
}

} // namespace

int main() {
    single_component_recovery();
    double_component_recovery();
    sampler_matches_oracle();
    kzft_gain();
    coefficient_exactness();
    bootstrap_structure();
    periodogram_values();
    milk_application();
    determinism();
    reconstruction_quality();
    std::printf("%d gating criteria failed\n", gating_failures);
    return gating_failures == 0 ? 0 : 1;
}
