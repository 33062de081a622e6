#include "pcdecomp/amplitude_mcmc.hpp"

#include "pcdecomp/error.hpp"
#include "pcdecomp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace pcdecomp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> sine_basis(const TimeSeries& data, double period, double phase) {
    std::vector<double> s(data.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(data.time(i)) / period + phase);
    return s;
}

} // namespace

double GammaPrior::log_pdf(double x) const noexcept {
    if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

void AmplitudeModel::validate() const {
    if (!(period > 0.0) || !std::isfinite(period)) throw InvalidArgument("model period must be positive");
    if (!std::isfinite(phase)) throw InvalidArgument("model phase must be finite");
    for (const auto* g : {&prior_amplitude, &prior_variance})
        if (!(g->shape > 0.0) || !(g->rate > 0.0)) throw InvalidArgument("gamma prior shape and rate must be positive");
}

void McmcConfig::validate() const {
    if (iterations == 0) throw InvalidArgument("MCMC iterations must be positive");
    if (burn_in >= iterations) throw InvalidArgument("burn_in must be smaller than iterations");
    if (!(init_amplitude > 0.0) || !(init_sigma > 0.0))
        throw InvalidArgument("initial amplitude and sigma must be positive");
    if (!(proposal_sd_amplitude > 0.0) || !(proposal_halfwidth_sigma > 0.0))
        throw InvalidArgument("proposal scales must be positive");
}

AmplitudePosterior::AmplitudePosterior(const TimeSeries& data, AmplitudeModel model)
    : model_(model), n_(data.size()) {
    model_.validate();
    const auto s = sine_basis(data, model_.period, model_.phase);
    const auto y = data.values();
    s_energy_ = kernels::dot(s, s);
    a_hat_ = s_energy_ > 0.0 ? kernels::dot(y, s) / s_energy_ : 0.0;
    // Residual about the least-squares fit, summed directly so that
    // RSS(A) = rss_min + (A - a_hat)^2 sum s^2 carries no cancellation.
    std::vector<double> r(y.begin(), y.end());
    kernels::axpy(-a_hat_, s, r);
    rss_min_ = kernels::dot(r, r);
}

double AmplitudePosterior::residual_sum_squares(double amplitude) const noexcept {
    const double d = amplitude - a_hat_;
    return rss_min_ + d * d * s_energy_;
}

double AmplitudePosterior::log_likelihood(double amplitude, double sigma) const noexcept {
    if (!(sigma > 0.0)) return kNegInf;
    const double n = static_cast<double>(n_);
    return -0.5 * n * std::log(2.0 * std::numbers::pi) - n * std::log(sigma) -
           residual_sum_squares(amplitude) / (2.0 * sigma * sigma);
}

double AmplitudePosterior::log_target(double amplitude, double sigma) const noexcept {
    if (!(amplitude > 0.0) || !(sigma > 0.0) || !std::isfinite(amplitude) || !std::isfinite(sigma)) return kNegInf;
    double lt = log_likelihood(amplitude, sigma) + model_.prior_amplitude.log_pdf(amplitude) +
                model_.prior_variance.log_pdf(sigma * sigma);
    if (model_.sigma_prior == SigmaPrior::jacobian_corrected) lt += std::log(2.0 * sigma);
    return lt;
}

double log_target(double amplitude, double sigma, const TimeSeries& data, const AmplitudeModel& model) {
    return AmplitudePosterior(data, model).log_target(amplitude, sigma);
}

double log_target(double amplitude, double sigma, const FilteredComponent& data, const AmplitudeModel& model) {
    return log_target(amplitude, sigma, data.series, model);
}

StepDraws draw_step(const McmcConfig& config, Engine& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> shift(-config.proposal_halfwidth_sigma, config.proposal_halfwidth_sigma);
    StepDraws d{};
    d.amplitude_normal = normal(rng);
    d.amplitude_uniform = unit(rng);
    d.sigma_shift = shift(rng);
    d.sigma_uniform = unit(rng);
    return d;
}

namespace {

// Symmetric proposals: the Hastings correction is 1, so the acceptance
// probability is min(1, target ratio). Accept iff u <= that probability.
bool accept(double current_lt, double proposed_lt, double u) noexcept {
    if (proposed_lt == kNegInf) return false;
    const double ratio = proposed_lt >= current_lt ? 1.0 : std::exp(proposed_lt - current_lt);
    return u <= ratio;
}

} // namespace

StepResult mh_step(const ChainState& state, const AmplitudePosterior& posterior, const McmcConfig& config,
                   const StepDraws& draws) {
    StepResult out{state, false, false};

    const double lt_current = posterior.log_target(state.amplitude, state.sigma);
    const double a_prop = state.amplitude + config.proposal_sd_amplitude * draws.amplitude_normal;
    const double lt_a = posterior.log_target(a_prop, state.sigma);
    double lt_now = lt_current;
    if (accept(lt_current, lt_a, draws.amplitude_uniform)) {
        out.state.amplitude = a_prop;
        out.accepted_amplitude = true;
        lt_now = lt_a;
    }

    const double s_prop = out.state.sigma + draws.sigma_shift;
    const double lt_s = posterior.log_target(out.state.amplitude, s_prop);
    if (accept(lt_now, lt_s, draws.sigma_uniform)) {
        out.state.sigma = s_prop;
        out.accepted_sigma = true;
    }
    return out;
}

StepResult mh_step(const ChainState& state, const AmplitudePosterior& posterior, const McmcConfig& config,
                   Engine& rng) {
    return mh_step(state, posterior, config, draw_step(config, rng));
}

PosteriorChain run_chain(const AmplitudePosterior& posterior, const McmcConfig& config) {
    config.validate();
    Engine rng(config.seed);
    PosteriorChain chain;
    chain.burn_in = config.burn_in;
    chain.samples.reserve(config.iterations);
    ChainState state{config.init_amplitude, config.init_sigma};
    for (std::size_t it = 0; it < config.iterations; ++it) {
        const auto step = mh_step(state, posterior, config, rng);
        state = step.state;
        chain.accepted_amplitude += step.accepted_amplitude ? 1 : 0;
        chain.accepted_sigma += step.accepted_sigma ? 1 : 0;
        chain.samples.push_back({state.amplitude, state.sigma, step.accepted_amplitude, step.accepted_sigma});
    }
    return chain;
}

PosteriorChain run_chain(const FilteredComponent& data, const AmplitudeModel& model, const McmcConfig& config) {
    return run_chain(AmplitudePosterior(data.series, model), config);
}

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 2) return static_cast<double>(n);
    const double mean = kernels::sum(chain) / static_cast<double>(n);
    std::vector<double> c(chain.begin(), chain.end());
    for (auto& v : c) v -= mean;
    auto autocov = [&](std::size_t lag) {
        return kernels::dot(std::span<const double>(c).first(n - lag), std::span<const double>(c).subspan(lag)) /
               static_cast<double>(n);
    };
    const double g0 = autocov(0);
    if (!(g0 > 0.0)) return static_cast<double>(n);

    double tau_sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        double pair = autocov(k) + autocov(k + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        tau_sum += pair;
    }
    const double tau = std::max((-g0 + 2.0 * tau_sum) / g0, 1.0 / static_cast<double>(n));
    return std::min(static_cast<double>(n) / tau, static_cast<double>(n) * std::log10(static_cast<double>(n)));
}

double AmplitudeEstimate::mcse_amplitude() const noexcept {
    return ess_amplitude > 0.0 ? sd_amplitude / std::sqrt(ess_amplitude) : 0.0;
}

double AmplitudeEstimate::mcse_sigma() const noexcept {
    return ess_sigma > 0.0 ? sd_sigma / std::sqrt(ess_sigma) : 0.0;
}

AmplitudeEstimate summarize(const PosteriorChain& chain) {
    const std::size_t total = chain.samples.size();
    if (chain.burn_in >= total || total - chain.burn_in < 100)
        throw InvalidArgument("summarize needs at least 100 post-burn-in samples, have " +
                              std::to_string(total > chain.burn_in ? total - chain.burn_in : 0));
    const std::size_t kept = total - chain.burn_in;
    std::vector<double> a(kept);
    std::vector<double> s(kept);
    for (std::size_t i = 0; i < kept; ++i) {
        a[i] = chain.samples[chain.burn_in + i].amplitude;
        s[i] = chain.samples[chain.burn_in + i].sigma;
    }
    auto moments = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = kernels::sum(v) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    };
    AmplitudeEstimate est;
    est.kept = kept;
    moments(a, est.mean_amplitude, est.sd_amplitude);
    moments(s, est.mean_sigma, est.sd_sigma);
    est.acceptance_rate_amplitude = static_cast<double>(chain.accepted_amplitude) / static_cast<double>(total);
    est.acceptance_rate_sigma = static_cast<double>(chain.accepted_sigma) / static_cast<double>(total);
    est.ess_amplitude = effective_sample_size(a);
    est.ess_sigma = effective_sample_size(s);
    return est;
}

namespace {

struct Moments {
    double mean_a;
    double mean_s;
};

Moments quadrature(const AmplitudePosterior& post, const Grid& ga, const Grid& gs) {
    const double da = (ga.hi - ga.lo) / static_cast<double>(ga.points - 1);
    const double ds = (gs.hi - gs.lo) / static_cast<double>(gs.points - 1);
    std::vector<double> lt(ga.points * gs.points);
    double peak = kNegInf;
    for (std::size_t i = 0; i < ga.points; ++i)
        for (std::size_t j = 0; j < gs.points; ++j) {
            const double v = post.log_target(ga.lo + da * static_cast<double>(i), gs.lo + ds * static_cast<double>(j));
            lt[i * gs.points + j] = v;
            peak = std::max(peak, v);
        }
    if (peak == kNegInf) throw InvalidArgument("posterior has no mass on the oracle grid");
    double z = 0.0, za = 0.0, zs = 0.0;
    for (std::size_t i = 0; i < ga.points; ++i) {
        const double wa = (i == 0 || i + 1 == ga.points) ? 0.5 : 1.0;
        const double a = ga.lo + da * static_cast<double>(i);
        for (std::size_t j = 0; j < gs.points; ++j) {
            const double ws = (j == 0 || j + 1 == gs.points) ? 0.5 : 1.0;
            const double s = gs.lo + ds * static_cast<double>(j);
            const double w = wa * ws * std::exp(lt[i * gs.points + j] - peak);
            z += w;
            za += w * a;
            zs += w * s;
        }
    }
    return {za / z, zs / z};
}

} // namespace

OracleResult posterior_oracle(const AmplitudePosterior& posterior, const Grid& amplitude, const Grid& sigma) {
    for (const auto* g : {&amplitude, &sigma})
        if (!(g->hi > g->lo) || g->points < 3) throw InvalidArgument("oracle grid needs hi > lo and >= 3 points");
    const auto coarse = quadrature(posterior, amplitude, sigma);
    const Grid fine_a{amplitude.lo, amplitude.hi, 2 * amplitude.points - 1};
    const Grid fine_s{sigma.lo, sigma.hi, 2 * sigma.points - 1};
    const auto fine = quadrature(posterior, fine_a, fine_s);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    const bool converged = rel(coarse.mean_a, fine.mean_a) <= 0.005 && rel(coarse.mean_s, fine.mean_s) <= 0.005;
    return {fine.mean_a, fine.mean_s, coarse.mean_a, coarse.mean_s, converged};
}

std::pair<Grid, Grid> default_oracle_grids(const AmplitudePosterior& posterior, std::size_t points) {
    const double n = static_cast<double>(posterior.size());
    const double sigma_hat = std::sqrt(std::max(posterior.residual_sum_squares(posterior.least_squares_amplitude()), 1e-300) / n);
    const double sd_s = sigma_hat / std::sqrt(2.0 * n);
    Grid gs{std::max(sigma_hat - 8.0 * sd_s, 1e-9), sigma_hat + 8.0 * sd_s, points};

    const auto& prior = posterior.model().prior_amplitude;
    const double prior_sd = std::sqrt(prior.shape) / prior.rate;
    double lo = 1e-9;
    double hi = prior.mean() + 20.0 * prior_sd;
    if (posterior.basis_energy() > 0.0) {
        const double sd_a = sigma_hat / std::sqrt(posterior.basis_energy());
        if (8.0 * sd_a < prior_sd) {
            lo = std::max(posterior.least_squares_amplitude() - 8.0 * sd_a, 1e-9);
            hi = std::max(posterior.least_squares_amplitude() + 8.0 * sd_a, lo + 8.0 * sd_a);
        }
    }
    return {Grid{lo, hi, points}, gs};
}

double align_phase(const TimeSeries& data, double period, std::size_t grid) {
    if (!(period > 0.0)) throw InvalidArgument("period must be positive");
    if (grid == 0) throw InvalidArgument("phase grid must be non-empty");
    // sum y sin(wt + phi) = cos(phi) sum y sin(wt) + sin(phi) sum y cos(wt)
    std::vector<double> s(data.size());
    std::vector<double> c(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(data.time(i)) / period;
        s[i] = std::sin(angle);
        c[i] = std::cos(angle);
    }
    double ys = 0.0, yc = 0.0;
    kernels::dot2(data.values(), s, c, ys, yc);
    double best_phi = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid; ++k) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid);
        const double v = std::cos(phi) * ys + std::sin(phi) * yc;
        if (v > best) {
            best = v;
            best_phi = phi;
        }
    }
    return best_phi;
}

void write_chain_csv(const PosteriorChain& chain, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "iter,A,sigma,accepted_A,accepted_sigma\n";
    for (std::size_t i = 0; i < chain.samples.size(); ++i) {
        const auto& s = chain.samples[i];
        out << i + 1 << ',' << format_double(s.amplitude) << ',' << format_double(s.sigma) << ','
            << (s.accepted_amplitude ? 1 : 0) << ',' << (s.accepted_sigma ? 1 : 0) << '\n';
    }
}

} // namespace pcdecomp
