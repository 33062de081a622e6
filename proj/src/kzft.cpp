#include "pcdecomp/kzft.hpp"

#include "pcdecomp/error.hpp"
#include "pcdecomp/kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace pcdecomp {

void KzftParams::validate() const {
    if (window < 3 || window % 2 == 0)
        throw InvalidArgument("KZFT window must be odd and >= 3, got " + std::to_string(window));
    if (iterations < 1) throw InvalidArgument("KZFT iterations must be >= 1");
    if (!(frequency > 0.0 && frequency <= 0.5))
        throw InvalidArgument("KZFT centre frequency must lie in (0, 0.5], got " + format_double(frequency));
}

std::string to_string(Boundary b) {
    return b == Boundary::renormalize ? "renormalize" : "trim";
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "renormalize") return Boundary::renormalize;
    if (s == "trim") return Boundary::trim;
    throw InvalidArgument("unknown boundary mode `" + s + "` (expected renormalize or trim)");
}

std::vector<double> kzft_coefficients(std::size_t window, std::size_t iterations) {
    if (window < 3 || window % 2 == 0) throw InvalidArgument("KZFT window must be odd and >= 3");
    if (iterations < 1) throw InvalidArgument("KZFT iterations must be >= 1");

    // Integer counts stay exact in double well past any practical (m, k); a
    // single division at the end makes every coefficient correctly rounded.
    std::vector<double> counts{1.0};
    for (std::size_t pass = 0; pass < iterations; ++pass) {
        std::vector<double> next(counts.size() + window - 1, 0.0);
        for (std::size_t i = 0; i < counts.size(); ++i)
            for (std::size_t j = 0; j < window; ++j) next[i + j] += counts[i];
        counts = std::move(next);
    }
    const double scale = std::pow(static_cast<double>(window), static_cast<double>(iterations));
    for (auto& c : counts) c /= scale;
    return counts;
}

double kz_response(std::size_t window, std::size_t iterations, double g) noexcept {
    const double m = static_cast<double>(window);
    const double den = m * std::sin(std::numbers::pi * g);
    double d = 1.0;
    if (std::abs(den) > 1e-300 && std::abs(std::sin(std::numbers::pi * g)) > 1e-15) {
        d = std::sin(std::numbers::pi * m * g) / den;
    } else {
        // g is an integer; for odd m the Dirichlet ratio tends to +1.
        d = 1.0;
    }
    return std::pow(d, static_cast<double>(iterations));
}

double kz_transfer(std::size_t window, std::size_t iterations, double g) noexcept {
    return std::abs(kz_response(window, iterations, g));
}

double transfer_gain(const KzftParams& params, double f) {
    params.validate();
    if (!(f >= 0.0 && f <= 0.5)) throw InvalidArgument("transfer_gain frequency must lie in [0, 0.5]");
    if (f == params.frequency) return 1.0;
    return kz_transfer(params.window, params.iterations, f - params.frequency);
}

double half_power_bandwidth(std::size_t window, std::size_t iterations) {
    double lo = 0.0;
    double hi = 1.0 / static_cast<double>(window); // first null
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kz_transfer(window, iterations, mid) >= 0.5) lo = mid;
        else hi = mid;
    }
    return 2.0 * 0.5 * (lo + hi);
}

std::vector<std::complex<double>> kzft_transform(const TimeSeries& series, const KzftParams& params,
                                                 Boundary boundary) {
    params.validate();
    const std::size_t n = series.size();
    const std::size_t support = params.support();
    if (n < support)
        throw InvalidArgument("series of length " + std::to_string(n) + " is shorter than the KZFT support " +
                              std::to_string(support));

    const auto coeffs = kzft_coefficients(params.window, params.iterations);
    const std::size_t h = params.half_width();
    std::vector<double> cos_row(support);
    std::vector<double> sin_row(support);
    for (std::size_t j = 0; j < support; ++j) {
        const double s = static_cast<double>(j) - static_cast<double>(h);
        const double angle = 2.0 * std::numbers::pi * params.frequency * s;
        cos_row[j] = coeffs[j] * std::cos(angle);
        sin_row[j] = -coeffs[j] * std::sin(angle);
    }

    // Prefix sums of the weights give the renormalisation for truncated windows.
    std::vector<double> weight_prefix(support + 1, 0.0);
    for (std::size_t j = 0; j < support; ++j) weight_prefix[j + 1] = weight_prefix[j] + coeffs[j];

    const auto x = series.values();
    std::size_t first = 0;
    std::size_t last = n; // exclusive
    if (boundary == Boundary::trim) {
        first = h;
        last = n - h;
    }

    std::vector<std::complex<double>> out;
    out.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) {
        // Kernel offsets j in [j_lo, j_hi) map to samples i - h + j inside [0, n).
        const std::size_t j_lo = i >= h ? 0 : h - i;
        const std::size_t j_hi = std::min(support, n + h - i);
        const std::size_t len = j_hi - j_lo;
        const std::size_t x_start = i + j_lo - h;
        double re = 0.0;
        double im = 0.0;
        kernels::dot2(x.subspan(x_start, len), std::span<const double>(cos_row).subspan(j_lo, len),
                      std::span<const double>(sin_row).subspan(j_lo, len), re, im);
        if (len != support) {
            const double w = weight_prefix[j_hi] - weight_prefix[j_lo];
            re /= w;
            im /= w;
        }
        out.emplace_back(re, im);
    }
    return out;
}

FilteredComponent kzft_apply(const TimeSeries& series, const KzftParams& params, Boundary boundary) {
    const auto z = kzft_transform(series, params, boundary);
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = 2.0 * z[i].real();
    const std::int64_t t0 =
        boundary == Boundary::trim ? series.t0() + static_cast<std::int64_t>(params.half_width()) : series.t0();
    std::ostringstream label;
    label << series.name() << "@kzft(" << params.window << ',' << params.iterations << ','
          << format_double(params.frequency) << ')';
    return FilteredComponent{TimeSeries(std::move(y), t0, label.str()), params, boundary, series.name()};
}

std::vector<KzftParams> choose_bandwidth(std::span<const double> frequencies, const BandwidthPolicy& policy) {
    if (frequencies.empty()) throw InvalidArgument("choose_bandwidth needs at least one frequency");
    if (policy.iterations < 1) throw InvalidArgument("KZFT iterations must be >= 1");
    if (!(policy.max_sidelobe > 0.0 && policy.max_sidelobe < 1.0))
        throw InvalidArgument("max_sidelobe must lie in (0, 1)");
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (!(frequencies[i] > 0.0 && frequencies[i] <= 0.5))
            throw InvalidArgument("centre frequency " + format_double(frequencies[i]) + " outside (0, 0.5]");
        for (std::size_t j = 0; j < i; ++j)
            if (frequencies[i] == frequencies[j])
                throw InvalidArgument("duplicate centre frequency " + format_double(frequencies[i]));
    }

    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < frequencies.size(); ++i)
        for (std::size_t j = i + 1; j < frequencies.size(); ++j)
            min_gap = std::min(min_gap, std::abs(frequencies[i] - frequencies[j]));

    const std::size_t max_support = policy.max_support == 0 ? std::numeric_limits<std::size_t>::max() : policy.max_support;
    const std::size_t k = policy.iterations;

    std::vector<KzftParams> out;
    out.reserve(frequencies.size());
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        const double nu = frequencies[i];
        bool found = false;
        for (std::size_t m = 3; k * (m - 1) + 1 <= max_support; m += 2) {
            bool ok = kz_transfer(m, k, 2.0 * nu) <= policy.max_sidelobe;
            for (std::size_t j = 0; ok && j < frequencies.size(); ++j)
                if (j != i) ok = kz_transfer(m, k, frequencies[j] - nu) <= policy.max_sidelobe;
            if (ok && std::isfinite(min_gap)) ok = half_power_bandwidth(m, k) <= 0.5 * min_gap;
            if (ok) {
                out.push_back(KzftParams{m, k, nu});
                found = true;
                break;
            }
        }
        if (!found) {
            // Name the neighbour that is hardest to separate from.
            double partner = nu;
            double closest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < frequencies.size(); ++j) {
                if (j != i && std::abs(frequencies[j] - nu) < closest) {
                    closest = std::abs(frequencies[j] - nu);
                    partner = frequencies[j];
                }
            }
            std::string msg = "unseparable frequencies " + format_double(nu) + " and " + format_double(partner) +
                              ": no odd window with support <= " + std::to_string(policy.max_support) +
                              " meets sidelobe " + format_double(policy.max_sidelobe);
            if (partner == nu) msg = "frequency " + format_double(nu) + " cannot be isolated from its conjugate image " +
                                     format_double(2.0 * nu) + " within support " + std::to_string(policy.max_support);
            throw UnseparableError(nu, partner, msg);
        }
    }
    return out;
}

KzftParams params_from_periods(double frequency, double periods_per_window, std::size_t iterations) {
    if (!(frequency > 0.0 && frequency <= 0.5)) throw InvalidArgument("centre frequency must lie in (0, 0.5]");
    if (!(periods_per_window > 0.0)) throw InvalidArgument("periods_per_window must be positive");
    const double span = periods_per_window / frequency;
    auto m = static_cast<std::size_t>(2.0 * std::floor(span / 2.0) + 1.0);
    m = std::max<std::size_t>(m, 3);
    KzftParams p{m, iterations, frequency};
    p.validate();
    return p;
}

void write_filter_manifest(const FilteredComponent& component, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["window"] = component.params.window;
    j["iterations"] = component.params.iterations;
    j["frequency"] = component.params.frequency;
    j["boundary"] = to_string(component.boundary);
    j["source"] = component.source_name;
    j["t0"] = component.series.t0();
    j["length"] = component.series.size();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace pcdecomp
