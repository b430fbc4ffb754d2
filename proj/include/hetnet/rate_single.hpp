#pragma once

// Single-tier downlink average rate by the MGF-based approach: the theorem's
// double integral, the closed-form G_I kernels (erfc form for alpha = 4,
// Meijer-G form with the small-argument splice for rational alpha/2), the
// interference-limited and dense-deployment limits, the high-SNR sandwich,
// frequency reuse, and correlated log-normal shadowing.

#include <cmath>
#include <optional>

#include "hetnet/common.hpp"
#include "hetnet/fading.hpp"
#include "hetnet/quadrature.hpp"
#include "hetnet/specfun.hpp"

namespace hetnet {

enum class GiMode { closed, integral, auto_mode };

struct Numerics {
    int n_gcq = 2000;
    int n_ghq = 5;
    double epsilon = 0.05;  // Meijer-G argument threshold for the asymptote splice
    SeriesControl series{};
    GiMode g_i_mode = GiMode::auto_mode;
    bool drop_asymptote = false;  // diagnostic: Heaviside-only variant, no asymptote branch
    double inner_rel_tol = 1e-8;
};

enum class RateMethod {
    theorem1_integral,
    corollary1_closed,
    corollary3_limit,
    corollary4_bound,
    eq9a_limit,
};

struct RateDiagnostics {
    long inner_integral_evals = 0;
    bool fallback_used = false;
};

struct RateResult {
    double rate_nats = 0.0;
    RateMethod method = RateMethod::theorem1_integral;
    RateDiagnostics diagnostics{};
};

struct SingleTierScenario {
    double lambda;
    double power;
    double alpha;
    double noise_power;
    int freq_bands = 1;
    FadingModel serving_fading = Rayleigh{};
    FadingModel interferer_fading = Rayleigh{};
    Numerics numerics{};

    double snr() const {
        return noise_power > 0.0 ? power / noise_power
                                 : std::numeric_limits<double>::infinity();
    }
};

inline void validate(const SingleTierScenario& s) {
    if (!(s.alpha > 2.0)) throw std::domain_error("scenario: alpha must exceed 2");
    if (!(s.lambda > 0.0)) throw std::domain_error("scenario: lambda must be positive");
    if (!(s.power > 0.0)) throw std::domain_error("scenario: power must be positive");
    if (s.noise_power < 0.0) throw std::domain_error("scenario: noise_power must be >= 0");
    if (s.freq_bands < 1) throw std::domain_error("scenario: freq_bands must be >= 1");
    validate(s.serving_fading);
    validate(s.interferer_fading);
}

// alpha/2 as a ratio of small coprime integers, if one exists.
inline std::optional<MeijerRateParams> rational_alpha_half(double alpha, int max_den = 4,
                                                           int max_num = 10) {
    const double half = alpha / 2.0;
    for (int den = 1; den <= max_den; ++den) {
        const int num = static_cast<int>(std::lround(half * den));
        if (num <= den || num > max_num) continue;
        if (std::fabs(half - static_cast<double>(num) / den) < 1e-9 &&
            std::gcd(num, den) == 1)
            return MeijerRateParams(num, den);
    }
    return std::nullopt;
}

namespace detail {

// Shared G_I kernel: everything the closed forms and the integral route need,
// with lambda and Z already adjusted for frequency reuse.
struct gi_kernel {
    double alpha;
    double pi_lambda;  // pi * lambda / F_B
    Numerics numerics;
    std::optional<MeijerRateParams> rational;

    mutable RateDiagnostics diag{};

    explicit gi_kernel(double alpha_, double pi_lambda_, const Numerics& num)
        : alpha(alpha_), pi_lambda(pi_lambda_), numerics(num),
          rational(rational_alpha_half(alpha_)) {}

    bool closed_form_available() const { return rational.has_value(); }

    // alpha = 4 kernel: G_I = (pi lambda / 2) sqrt(pi/y) e^{c^2} erfc(c).
    double erfc_form(double y, double z_val) const {
        const double c = pi_lambda * z_val / (2.0 * std::sqrt(y));
        return 0.5 * pi_lambda * std::sqrt(pi / y) * erfcx(c);
    }

    double meijer_form(double y, double z_val) const {
        const auto& p = *rational;
        const double nu = p.nu_alpha();
        const int aN = p.alpha_num, aD = p.alpha_den;
        const double ln_plz = std::log(pi_lambda * z_val);
        const double arg = std::exp(aN * std::log(static_cast<double>(aN)) -
                                    aD * std::log(static_cast<double>(aD)) +
                                    aD * std::log(y) - aN * ln_plz);
        double upsilon;
        if (arg >= numerics.epsilon) {
            upsilon = meijer_g_rate(p, arg);
        } else if (numerics.drop_asymptote) {
            upsilon = 0.0;
        } else {
            upsilon = meijer_g_asymptote(p, arg);
        }
        const double coef = std::sqrt(static_cast<double>(aD)) *
                            std::pow(static_cast<double>(aN), nu + 0.5) /
                            std::pow(2.0 * pi, 0.5 * (aN + aD) - 1.0);
        const double scale = std::exp((nu + 1.0) * std::log(pi_lambda) +
                                      (nu + 2.0) * std::log(z_val));
        return 1.0 / z_val - 0.5 * alpha * y * coef * upsilon / scale;
    }

    double evaluate(double y, double z_val) const {
        switch (numerics.g_i_mode) {
            case GiMode::closed:
                return closed(y, z_val);
            case GiMode::integral:
                return integral(y, z_val);
            case GiMode::auto_mode:
            default:
                if (closed_form_available()) {
                    try {
                        return closed(y, z_val);
                    } catch (const numeric_instability_error&) {
                        diag.fallback_used = true;
                        return integral(y, z_val);
                    }
                }
                return integral(y, z_val);
        }
    }

    double closed(double y, double z_val) const {
        if (!closed_form_available())
            throw std::domain_error("g_i: closed mode requires rational alpha/2 with small terms");
        if (rational->alpha_num == 2 && rational->alpha_den == 1) return erfc_form(y, z_val);
        return meijer_form(y, z_val);
    }

    double integral(double y, double z_val) const {
        const double b = pi_lambda * z_val;
        const double half = 0.5 * alpha;
        const double yscale = y * std::pow(b, -half);
        auto f = [&](double v) {
            return std::exp((half - 1.0) * std::log(v) - v - yscale * std::pow(v, half));
        };
        ++diag.inner_integral_evals;
        const double inner = integrate_semi_infinite(f, numerics.inner_rel_tol) * std::pow(b, -half);
        return 1.0 / z_val - half * (y / z_val) * inner;
    }
};

// Cached per-scenario state shared by the rate operations.
struct single_ctx {
    const SingleTierScenario& scn;
    QuadratureRule gcq;
    QuadratureRule ghq;
    gi_kernel kernel;

    explicit single_ctx(const SingleTierScenario& s)
        : scn(s),
          gcq(gcq_nodes(s.numerics.n_gcq)),
          ghq(ghq_nodes(s.numerics.n_ghq)),
          kernel(s.alpha, pi * s.lambda / s.freq_bands, s.numerics) {
        validate(s);
    }

    // Z_I^{(F_B)}(v) = (F_B - 1) + M_I(v) + T_I(v)
    double z_of(double v) const {
        return (scn.freq_bands - 1) + mgf(scn.interferer_fading, v, ghq) +
               t_i(scn.interferer_fading, scn.alpha, v, ghq, scn.numerics.series);
    }

    double m0(double v) const { return mgf(scn.serving_fading, v, ghq); }
};

}  // namespace detail

// Z_I(z) + the frequency-reuse offset.
inline double z_i(const SingleTierScenario& scn, double z) {
    if (z < 0.0) throw std::domain_error("z_i: z >= 0 required");
    detail::single_ctx ctx(scn);
    return ctx.z_of(z);
}

// The G_I kernel at y > 0 (density lambda/F_B, reuse-adjusted Z).
inline double g_i(const SingleTierScenario& scn, double y) {
    if (!(y > 0.0)) throw std::domain_error("g_i: y > 0 required");
    detail::single_ctx ctx(scn);
    return ctx.kernel.evaluate(y, ctx.z_of(scn.snr() * y));
}

// Average rate in nats via the mapped Gauss-Chebyshev rule applied in the
// z = SNR y variable (identical integral, well conditioned at any SNR).
inline RateResult average_rate(const SingleTierScenario& scn);
inline RateResult rate_interference_limited(const SingleTierScenario& scn);

inline RateResult average_rate(const SingleTierScenario& scn) {
    detail::single_ctx ctx(scn);
    if (!(scn.noise_power > 0.0)) return rate_interference_limited(scn);
    const double snr = scn.snr();
    kahan_sum acc;
    bool all_closed = true;
    for (size_t n = 0; n < ctx.gcq.size(); ++n) {
        const double zv = ctx.gcq.abscissas[n];
        const double w = ctx.gcq.weights[n];
        const double m0 = ctx.m0(zv);
        if (1.0 - m0 <= 0.0) continue;
        const double zi = ctx.z_of(zv);
        const double gi = ctx.kernel.evaluate(zv / snr, zi);
        acc.add(w / zv * (1.0 - m0) * gi);
    }
    all_closed = ctx.kernel.closed_form_available() &&
                 scn.numerics.g_i_mode != GiMode::integral && !ctx.kernel.diag.fallback_used;
    RateResult r;
    r.rate_nats = std::max(acc.value(), 0.0);
    r.method = all_closed ? RateMethod::corollary1_closed : RateMethod::theorem1_integral;
    r.diagnostics = ctx.kernel.diag;
    return r;
}

// Interference-limited rate (sigma_N^2 = 0); independent of lambda and power.
inline RateResult rate_interference_limited(const SingleTierScenario& scn) {
    detail::single_ctx ctx(scn);
    kahan_sum acc;
    for (size_t n = 0; n < ctx.gcq.size(); ++n) {
        const double zv = ctx.gcq.abscissas[n];
        const double w = ctx.gcq.weights[n];
        const double m0 = ctx.m0(zv);
        if (1.0 - m0 <= 0.0) continue;
        acc.add(w / zv * (1.0 - m0) / ctx.z_of(zv));
    }
    RateResult r;
    r.rate_nats = std::max(acc.value(), 0.0);
    r.method = RateMethod::corollary3_limit;
    return r;
}

// Dense-deployment limit; same integral, tagged per its own derivation.
inline RateResult rate_density_limit(const SingleTierScenario& scn) {
    RateResult r = rate_interference_limited(scn);
    r.method = RateMethod::eq9a_limit;
    return r;
}

// High-SNR sandwich: (lower, upper) with upper the interference-limited value.
inline std::pair<double, double> rate_high_snr_bound(const SingleTierScenario& scn) {
    if (!(scn.noise_power > 0.0))
        throw std::domain_error("rate_high_snr_bound: noise_power > 0 required");
    detail::single_ctx ctx(scn);
    const double upper = rate_interference_limited(scn).rate_nats;
    const double half = 0.5 * scn.alpha;
    kahan_sum acc;
    for (size_t n = 0; n < ctx.gcq.size(); ++n) {
        const double zv = ctx.gcq.abscissas[n];
        const double w = ctx.gcq.weights[n];
        const double m0 = ctx.m0(zv);
        if (1.0 - m0 <= 0.0) continue;
        acc.add(w * (1.0 - m0) * std::pow(ctx.z_of(zv), -(1.0 + half)));
    }
    const double pl = pi * scn.lambda / scn.freq_bands;
    const double gap = std::pow(pl, -half) * std::exp(ln_gamma(1.0 + half)) / scn.snr() *
                       acc.value();
    return {upper - gap, upper};
}

// Correlated log-normal shadowing: condition on the shared normal, apply the
// mu/sigma substitutions to both links, remove the conditioning by GHQ.
inline RateResult average_rate_correlated(const SingleTierScenario& scn, double rho,
                                          const QuadratureRule& outer_ghq) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::domain_error("average_rate_correlated: rho in [0,1] required");
    if (!has_lognormal_component(scn.serving_fading) ||
        !has_lognormal_component(scn.interferer_fading))
        throw std::domain_error("average_rate_correlated: fading models must have a log-normal part");
    const double mu_s = lognormal_mu_db(scn.serving_fading);
    const double sg_s = lognormal_sigma_db(scn.serving_fading);
    const double mu_i = lognormal_mu_db(scn.interferer_fading);
    const double sg_i = lognormal_sigma_db(scn.interferer_fading);
    const double shrink = std::sqrt(1.0 - rho);
    kahan_sum acc;
    RateResult last;
    for (size_t e = 0; e < outer_ghq.size(); ++e) {
        const double x = std::sqrt(2.0) * outer_ghq.abscissas[e];
        SingleTierScenario cond = scn;
        cond.serving_fading = with_lognormal_params(scn.serving_fading,
                                                    mu_s + sg_s * std::sqrt(rho) * x, sg_s * shrink);
        cond.interferer_fading = with_lognormal_params(
            scn.interferer_fading, mu_i + sg_i * std::sqrt(rho) * x, sg_i * shrink);
        last = average_rate(cond);
        acc.add(outer_ghq.weights[e] * last.rate_nats);
    }
    RateResult r;
    r.rate_nats = acc.value() / sqrt_pi;
    r.method = last.method;
    r.diagnostics = last.diagnostics;
    return r;
}

}  // namespace hetnet
