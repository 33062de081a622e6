#include "pcdecomp/amplitude_mcmc.hpp"
#include "pcdecomp/error.hpp"
#include "pcdecomp/time_series.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pcdecomp;

namespace {

AmplitudeModel fixture_model(SigmaPrior mode = SigmaPrior::literal) {
    AmplitudeModel m;
    m.period = 15.0;
    m.phase = 0.0;
    m.sigma_prior = mode;
    return m;
}

TimeSeries tiny() { return read_csv(test_support::fixture("mcmc_n5.csv")); }

} // namespace

TEST_CASE("gamma prior density") {
    const GammaPrior g{2.0, 0.5};
    // shape*log(rate) - lgamma(shape) + (shape-1) log x - rate x
    const double x = 3.0;
    CHECK(g.log_pdf(x) == doctest::Approx(2 * std::log(0.5) - std::lgamma(2.0) + std::log(x) - 0.5 * x).epsilon(1e-14));
    CHECK(g.log_pdf(0.0) == -INFINITY);
    CHECK(g.log_pdf(-1.0) == -INFINITY);
    CHECK(g.mean() == 4.0);
}

TEST_CASE("log target against values frozen from an independent density implementation") {
    // scipy.stats norm.logpdf + gamma.logpdf(A, 1, scale=10) + gamma.logpdf(sigma^2, 1, scale=1e4)
    struct Row {
        double a, s, literal, corrected;
    };
    const Row rows[] = {
        {3.0, 2.0, -27.198226561198823, -25.81193220007893},
        {5.5, 1.5, -45.16884584032731, -44.0702335516592},
        {3.8, 2.0, -29.130039434390284, -27.743745073270393},
        {3.8, 1.7, -31.841789425192978, -30.618013993570862},
    };
    const auto data = tiny();
    const AmplitudePosterior lit(data, fixture_model());
    const AmplitudePosterior cor(data, fixture_model(SigmaPrior::jacobian_corrected));
    for (const auto& r : rows) {
        CAPTURE(r.a);
        CAPTURE(r.s);
        CHECK(lit.log_target(r.a, r.s) == doctest::Approx(r.literal).epsilon(1e-12));
        CHECK(cor.log_target(r.a, r.s) == doctest::Approx(r.corrected).epsilon(1e-12));
        CHECK(log_target(r.a, r.s, data, fixture_model()) == doctest::Approx(r.literal).epsilon(1e-12));
    }
}

TEST_CASE("log target support and structure") {
    const auto data = tiny();
    const AmplitudePosterior post(data, fixture_model());
    CHECK(post.log_target(0.0, 1.0) == -INFINITY);
    CHECK(post.log_target(-1.0, 1.0) == -INFINITY);
    CHECK(post.log_target(1.0, 0.0) == -INFINITY);
    CHECK(post.log_target(1.0, -2.0) == -INFINITY);

    SUBCASE("single zero datum") {
        // One observation at t = 15: the sine basis is sin(2 pi) so the mean term vanishes for any A.
        const TimeSeries one({0.0}, 15);
        const AmplitudePosterior p(one, fixture_model());
        const double a = 2.0;
        const double expected = -0.5 * std::log(2 * std::numbers::pi) + std::log(0.1 * std::exp(-0.1 * a)) +
                                std::log(0.0001 * std::exp(-0.0001 * 1.0));
        CHECK(p.log_target(a, 1.0) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("duplicated periods double the likelihood") {
        std::vector<double> v(15);
        for (std::size_t i = 0; i < 15; ++i) v[i] = 3 * std::sin(2 * std::numbers::pi * static_cast<double>(i + 1) / 15) + 0.1 * static_cast<double>(i % 4);
        std::vector<double> vv(v);
        vv.insert(vv.end(), v.begin(), v.end());
        const AmplitudePosterior p1(TimeSeries(v), fixture_model());
        const AmplitudePosterior p2(TimeSeries(vv), fixture_model());
        CHECK(p2.log_likelihood(2.7, 0.8) == doctest::Approx(2 * p1.log_likelihood(2.7, 0.8)).epsilon(1e-12));
    }
    SUBCASE("sufficient statistics match the direct residual sum") {
        double rss = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double r = data[i] - 2.2 * std::sin(2 * std::numbers::pi * static_cast<double>(data.time(i)) / 15);
            rss += r * r;
        }
        CHECK(post.residual_sum_squares(2.2) == doctest::Approx(rss).epsilon(1e-12));
    }
}

TEST_CASE("one Metropolis-Hastings step with pinned draws") {
    const auto data = tiny();
    const AmplitudePosterior post(data, fixture_model());
    const McmcConfig cfg;
    // ratio for A: 3.0 -> 3.8 at sigma 2 is exp(-29.130039434390284 + 27.198226561198823) = 0.144885...
    // ratio for sigma: 2.0 -> 1.7 at A 3.8 is exp(-31.841789425192978 + 29.130039434390284) = 0.066418...
    const double ratio_a = std::exp(-29.130039434390284 + 27.198226561198823);
    const double ratio_s = std::exp(-31.841789425192978 + 29.130039434390284);
    CHECK(ratio_a == doctest::Approx(0.14488530157718185).epsilon(1e-10));

    auto step = mh_step({3.0, 2.0}, post, cfg, StepDraws{0.4, 0.1, -0.3, 0.8});
    CHECK(step.accepted_amplitude);
    CHECK_FALSE(step.accepted_sigma);
    CHECK(step.state == ChainState{3.8, 2.0});

    step = mh_step({3.0, 2.0}, post, cfg, StepDraws{0.4, ratio_a * 1.0001, -0.3, ratio_s * 0.9999});
    CHECK_FALSE(step.accepted_amplitude);
    CHECK(step.state.amplitude == 3.0);

    step = mh_step({3.0, 2.0}, post, cfg, StepDraws{0.4, ratio_a * 0.9999, -0.3, ratio_s * 0.9999});
    CHECK(step.accepted_amplitude);
    CHECK(step.accepted_sigma);
    CHECK(step.state.sigma == doctest::Approx(1.7));

    SUBCASE("a proposal equal to the current state is always accepted") {
        const auto s = mh_step({3.0, 2.0}, post, cfg, StepDraws{0.0, 1.0, 0.0, 1.0});
        CHECK(s.accepted_amplitude);
        CHECK(s.accepted_sigma);
    }
    SUBCASE("out-of-support proposals are rejected") {
        const auto s = mh_step({3.0, 0.2}, post, cfg, StepDraws{-2.0, 0.0, -0.3, 0.0});
        CHECK_FALSE(s.accepted_amplitude);
        CHECK_FALSE(s.accepted_sigma);
        CHECK(s.state == ChainState{3.0, 0.2});
    }
}

TEST_CASE("run_chain bookkeeping and determinism") {
    const auto data = read_csv(test_support::fixture("mcmc_n60.csv"));
    const AmplitudePosterior post(data, fixture_model());
    McmcConfig cfg;
    cfg.seed = 5;
    const auto a = run_chain(post, cfg);
    const auto b = run_chain(post, cfg);
    CHECK(a.samples == b.samples);
    CHECK(a.samples.size() == 3000);
    CHECK(a.burn_in == 300);
    std::size_t acc_a = 0, acc_s = 0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        acc_a += a.samples[i].accepted_amplitude;
        acc_s += a.samples[i].accepted_sigma;
        if (i > 0 && !a.samples[i].accepted_amplitude) CHECK(a.samples[i].amplitude == a.samples[i - 1].amplitude);
        CHECK(a.samples[i].amplitude > 0.0);
        CHECK(a.samples[i].sigma > 0.0);
    }
    CHECK(acc_a == a.accepted_amplitude);
    CHECK(acc_s == a.accepted_sigma);

    cfg.seed = 6;
    CHECK_FALSE(run_chain(post, cfg).samples == a.samples);

    cfg.iterations = 1;
    cfg.burn_in = 0;
    CHECK(run_chain(post, cfg).samples.size() == 1);

    cfg.iterations = 10;
    cfg.burn_in = 10;
    CHECK_THROWS_AS(run_chain(post, cfg), InvalidArgument);
}

TEST_CASE("summarize") {
    PosteriorChain c;
    c.burn_in = 10;
    for (int i = 0; i < 210; ++i) c.samples.push_back({4.0, 1.5, false, false});
    const auto e = summarize(c);
    CHECK(e.mean_amplitude == 4.0);
    CHECK(e.sd_amplitude == 0.0);
    CHECK(e.mean_sigma == 1.5);
    CHECK(e.kept == 200);
    CHECK(e.acceptance_rate() == 0.0);

    PosteriorChain short_chain;
    short_chain.samples.resize(50, {1.0, 1.0, true, true});
    CHECK_THROWS_AS(summarize(short_chain), InvalidArgument);
}

TEST_CASE("effective sample size") {
    const auto iid = test_support::random_vector(4000, 3);
    const double ess = effective_sample_size(iid);
    CHECK(ess > 0.8 * 4000);
    CHECK(ess < 1.2 * 4000);

    std::vector<double> ar(8000);
    const auto eps = test_support::random_vector(8000, 4);
    ar[0] = eps[0];
    for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = 0.9 * ar[i - 1] + eps[i];
    const double expected = 8000.0 * (1 - 0.9) / (1 + 0.9);
    CHECK(effective_sample_size(ar) > 0.6 * expected);
    CHECK(effective_sample_size(ar) < 1.4 * expected);

    CHECK(effective_sample_size(std::vector<double>(100, 2.0)) == 100.0);
}

TEST_CASE("quadrature oracle") {
    SUBCASE("flat likelihood in A returns the prior mean") {
        // Period 1 puts every observation on a zero of the sine basis.
        AmplitudeModel m = fixture_model();
        m.period = 1.0;
        const AmplitudePosterior p(TimeSeries({0.3, -0.2, 0.1, 0.4}), m);
        const auto r = posterior_oracle(p, Grid{1e-9, 250.0, 4001}, Grid{0.05, 5.0, 401});
        CHECK(r.mean_amplitude == doctest::Approx(10.0).epsilon(0.005));
    }
    SUBCASE("fixture posterior converges under refinement") {
        const auto data = read_csv(test_support::fixture("mcmc_n60.csv"));
        const AmplitudePosterior p(data, fixture_model());
        const auto [ga, gs] = default_oracle_grids(p);
        const auto r = posterior_oracle(p, ga, gs);
        CHECK(r.converged);
        CHECK(std::abs(r.mean_amplitude - r.coarse_mean_amplitude) <= 0.005 * std::abs(r.mean_amplitude));
        CHECK(r.mean_amplitude == doctest::Approx(p.least_squares_amplitude()).epsilon(0.02));
    }
}

TEST_CASE("align_phase recovers the phase of a clean sinusoid") {
    for (double phi : {0.0, 1.0, 2.5, 5.9}) {
        const std::vector<SinusoidModel> c{{4, 12, phi}};
        const auto s = simulate_mpc(c, 0.0, 144, 1);
        const double est = align_phase(s, 12.0);
        double diff = std::abs(est - phi);
        diff = std::min(diff, 2 * std::numbers::pi - diff);
        CHECK(diff <= 2 * std::numbers::pi / 256 + 1e-12);
    }
}

TEST_CASE("chain CSV") {
    test_support::TempDir dir("chain");
    PosteriorChain c;
    c.samples = {{1.5, 2.0, true, false}, {1.5, 2.25, false, true}};
    write_chain_csv(c, dir / "c.csv");
    CHECK(test_support::slurp(dir / "c.csv") == "iter,A,sigma,accepted_A,accepted_sigma\n1,1.5,2,1,0\n2,1.5,2.25,0,1\n");
}
