#pragma once

// Metropolis-Hastings sampler for the amplitude A and noise scale sigma of one
// band-limited periodic component under
//
//     y_t ~ N(A sin(2 pi t / p + phi), sigma^2),   A ~ Gamma(a_A, b_A),   sigma^2 ~ Gamma(a_v, b_v)
//
// with shape-rate gamma priors. The chain walks on (A, sigma): a Gaussian
// random walk for A, then a uniform +-h step for sigma, each accepted on its
// own. In the literal mode the variance prior density is evaluated at sigma^2
// and used directly as a density over sigma; the corrected mode adds the
// change-of-variables term log(2 sigma).

#include "pcdecomp/kzft.hpp"
#include "pcdecomp/rng.hpp"
#include "pcdecomp/time_series.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pcdecomp {

struct GammaPrior {
    double shape = 1.0;
    double rate = 1.0;

    double log_pdf(double x) const noexcept; // -inf outside x > 0
    double mean() const noexcept { return shape / rate; }
};

enum class SigmaPrior { literal, jacobian_corrected };

struct AmplitudeModel {
    double period = 1.0;
    double phase = 0.0;
    GammaPrior prior_amplitude{1.0, 0.1};
    GammaPrior prior_variance{1.0, 0.0001};
    SigmaPrior sigma_prior = SigmaPrior::literal;

    void validate() const;
};

struct McmcConfig {
    std::size_t iterations = 3000;
    std::size_t burn_in = 300;
    double init_amplitude = 2.0;
    double init_sigma = 6.0;
    double proposal_sd_amplitude = 2.0;
    double proposal_halfwidth_sigma = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Unnormalised log posterior for one series. The data enter only through
/// n, sum s_t^2, the least-squares amplitude and its residual sum of squares,
/// so each evaluation is O(1).
class AmplitudePosterior {
public:
    AmplitudePosterior(const TimeSeries& data, AmplitudeModel model);

    double log_target(double amplitude, double sigma) const noexcept;
    double log_likelihood(double amplitude, double sigma) const noexcept;

    const AmplitudeModel& model() const noexcept { return model_; }
    std::size_t size() const noexcept { return n_; }
    double least_squares_amplitude() const noexcept { return a_hat_; }
    double residual_sum_squares(double amplitude) const noexcept;
    double basis_energy() const noexcept { return s_energy_; }

private:
    AmplitudeModel model_;
    std::size_t n_ = 0;
    double s_energy_ = 0.0; // sum s_t^2
    double a_hat_ = 0.0;    // sum y_t s_t / sum s_t^2
    double rss_min_ = 0.0;  // sum (y_t - a_hat s_t)^2
};

double log_target(double amplitude, double sigma, const TimeSeries& data, const AmplitudeModel& model);
double log_target(double amplitude, double sigma, const FilteredComponent& data, const AmplitudeModel& model);

struct ChainState {
    double amplitude;
    double sigma;

    bool operator==(const ChainState&) const = default;
};

/// Random inputs consumed by one step, in draw order.
struct StepDraws {
    double amplitude_normal; // standard normal, scaled by proposal_sd_amplitude
    double amplitude_uniform;
    double sigma_shift;      // uniform on [-h, h]
    double sigma_uniform;
};

StepDraws draw_step(const McmcConfig& config, Engine& rng);

struct StepResult {
    ChainState state;
    bool accepted_amplitude;
    bool accepted_sigma;
};

StepResult mh_step(const ChainState& state, const AmplitudePosterior& posterior, const McmcConfig& config,
                   const StepDraws& draws);
StepResult mh_step(const ChainState& state, const AmplitudePosterior& posterior, const McmcConfig& config,
                   Engine& rng);

struct ChainSample {
    double amplitude;
    double sigma;
    bool accepted_amplitude;
    bool accepted_sigma;

    bool operator==(const ChainSample&) const = default;
};

struct PosteriorChain {
    std::vector<ChainSample> samples; // one per iteration; rejections repeat the previous state
    std::size_t accepted_amplitude = 0;
    std::size_t accepted_sigma = 0;
    std::size_t burn_in = 0;
};

PosteriorChain run_chain(const AmplitudePosterior& posterior, const McmcConfig& config);
PosteriorChain run_chain(const FilteredComponent& data, const AmplitudeModel& model, const McmcConfig& config);

struct AmplitudeEstimate {
    double mean_amplitude = 0.0;
    double sd_amplitude = 0.0;
    double mean_sigma = 0.0;
    double sd_sigma = 0.0;
    double acceptance_rate_amplitude = 0.0;
    double acceptance_rate_sigma = 0.0;
    double ess_amplitude = 0.0;
    double ess_sigma = 0.0;
    std::size_t kept = 0;

    double acceptance_rate() const noexcept { return 0.5 * (acceptance_rate_amplitude + acceptance_rate_sigma); }
    // Monte Carlo standard errors from the effective sample sizes.
    double mcse_amplitude() const noexcept;
    double mcse_sigma() const noexcept;
};

/// Post-burn-in moments; needs at least 100 retained samples.
AmplitudeEstimate summarize(const PosteriorChain& chain);

/// Effective sample size via Geyer's initial monotone sequence estimator.
double effective_sample_size(std::span<const double> chain);

struct Grid {
    double lo;
    double hi;
    std::size_t points;
};

struct OracleResult {
    double mean_amplitude;
    double mean_sigma;
    double coarse_mean_amplitude;
    double coarse_mean_sigma;
    bool converged; // doubling the grid resolution moved both means by <= 0.5%
};

/// Posterior means by 2-D trapezoidal quadrature of exp(log_target). Reports
/// the refined-grid means together with the coarse-grid ones.
OracleResult posterior_oracle(const AmplitudePosterior& posterior, const Grid& amplitude, const Grid& sigma);

/// Grids spanning the likelihood mode +- 8 standard errors, widened towards
/// the prior when the likelihood is flat in A.
std::pair<Grid, Grid> default_oracle_grids(const AmplitudePosterior& posterior, std::size_t points = 401);

/// Phase in [0, 2 pi) from a `grid`-point scan maximising sum y_t sin(2 pi t / p + phi).
double align_phase(const TimeSeries& data, double period, std::size_t grid = 256);

void write_chain_csv(const PosteriorChain& chain, const std::filesystem::path& path);

} // namespace pcdecomp
