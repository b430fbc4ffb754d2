#pragma once

// Multi-tier average rate with biased association: the general two-fold
// integral for per-tier path-loss exponents, the equal-alpha specialization
// that reuses the single-tier G_I kernel, per-tier frequency reuse, and the
// dense/interference-limited and high-SNR limits.

#include <cmath>
#include <vector>

#include "hetnet/rate_single.hpp"

namespace hetnet {

struct TierSpec {
    double lambda;
    double power;
    double alpha;
    double bias = 1.0;
    int freq_bands = 1;
    FadingModel serving_fading = Rayleigh{};
    FadingModel interferer_fading = Rayleigh{};
};

struct NetworkSpec {
    std::vector<TierSpec> tiers;
    double noise_power = 0.0;
    Numerics numerics{};

    size_t num_tiers() const { return tiers.size(); }
    double snr(size_t t_1based) const {
        const auto& tier = tiers.at(t_1based - 1);
        return noise_power > 0.0 ? tier.power / noise_power
                                 : std::numeric_limits<double>::infinity();
    }
};

inline void validate(const NetworkSpec& net) {
    if (net.tiers.empty()) throw std::domain_error("network: at least one tier required");
    if (net.noise_power < 0.0) throw std::domain_error("network: noise_power must be >= 0");
    for (const auto& t : net.tiers) {
        if (!(t.lambda > 0.0)) throw std::domain_error("tier: lambda must be positive");
        if (!(t.power > 0.0)) throw std::domain_error("tier: power must be positive");
        if (!(t.alpha > 2.0)) throw std::domain_error("tier: alpha must exceed 2");
        if (!(t.bias > 0.0)) throw std::domain_error("tier: bias must be positive");
        if (t.freq_bands < 1) throw std::domain_error("tier: freq_bands must be >= 1");
        validate(t.serving_fading);
        validate(t.interferer_fading);
    }
}

inline bool equal_alpha(const NetworkSpec& net) {
    for (const auto& t : net.tiers)
        if (std::fabs(t.alpha - net.tiers.front().alpha) >= 1e-12) return false;
    return true;
}

namespace detail {

struct multi_ctx {
    const NetworkSpec& net;
    QuadratureRule gcq;
    QuadratureRule ghq;

    explicit multi_ctx(const NetworkSpec& n)
        : net(n), gcq(gcq_nodes(n.numerics.n_gcq)), ghq(ghq_nodes(n.numerics.n_ghq)) {
        validate(n);
    }

    // (P_q B_q)/(P_t B_t)
    double power_bias_ratio(size_t t, size_t q) const {
        const auto& T = net.tiers[t];
        const auto& Q = net.tiers[q];
        return (Q.power * Q.bias) / (T.power * T.bias);
    }

    // reuse-extended bracket (F_q - 1) + M_{q,I}(v) + T_{q,I}(v)
    double bracket(size_t q, double v) const {
        const auto& Q = net.tiers[q];
        return (Q.freq_bands - 1) + mgf(Q.interferer_fading, v, ghq) +
               t_i(Q.interferer_fading, Q.alpha, v, ghq, net.numerics.series);
    }

    // Z-tilde^{(t,q)}(y); 0-based tiers. With positive noise the argument is
    // ratio^{-1} SNR_q y; in the sigma_N^2-free form y plays z = SNR_t y and
    // the argument becomes (B_t/B_q) z.
    double z_tilde(size_t t, size_t q, double y) const {
        const auto& Q = net.tiers[q];
        const double ratio = power_bias_ratio(t, q);
        double arg;
        if (net.noise_power > 0.0) {
            arg = (1.0 / ratio) * (Q.power / net.noise_power) * y;
        } else {
            arg = (net.tiers[t].bias / Q.bias) * y;
        }
        return std::pow(ratio, 2.0 / Q.alpha) * bracket(q, arg);
    }

    // Equal-alpha denominator in the z = SNR_t y variable:
    // D_t(z) = sum_q (lambda_q F_t)/(lambda_t F_q) ratio^{2/alpha} bracket((B_t/B_q) z)
    double equal_alpha_denominator(size_t t, double z) const {
        const auto& T = net.tiers[t];
        kahan_sum acc;
        for (size_t q = 0; q < net.tiers.size(); ++q) {
            const auto& Q = net.tiers[q];
            const double weight = (Q.lambda * T.freq_bands) / (T.lambda * Q.freq_bands);
            const double ratio = power_bias_ratio(t, q);
            acc.add(weight * std::pow(ratio, 2.0 / T.alpha) * bracket(q, (T.bias / Q.bias) * z));
        }
        return acc.value();
    }

    double m0(size_t t, double v) const { return mgf(net.tiers[t].serving_fading, v, ghq); }
};

// General-path inner integral over the deployment variable:
//   int_0^inf xi exp{-pi sum_q lam_q' Ztq(y) xi^{2 a_t/a_q}} e^{-y xi^{a_t}} dxi
// scaled so the total exponent is ~1 at the substitution point.
inline double general_inner(const multi_ctx& ctx, size_t t, double y,
                            const std::vector<double>& ztq, double rel_tol) {
    const auto& tiers = ctx.net.tiers;
    const double at = tiers[t].alpha;
    std::vector<double> coef(tiers.size()), expo(tiers.size());
    for (size_t q = 0; q < tiers.size(); ++q) {
        coef[q] = pi * (tiers[q].lambda / tiers[q].freq_bands) * ztq[q];
        expo[q] = 2.0 * at / tiers[q].alpha;
    }
    auto total_exponent = [&](double u) {
        double e = y * std::pow(u, at);
        for (size_t q = 0; q < tiers.size(); ++q) e += coef[q] * std::pow(u, expo[q]);
        return e;
    };
    // bisect for the u with exponent 1 to condition the integrand
    double lo = 1e-30, hi = 1e30;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (total_exponent(mid) > 1.0 ? hi : lo) = mid;
        if (hi / lo < 1.0 + 1e-12) break;
    }
    const double u_star = std::sqrt(lo * hi);
    auto f = [&](double v) {
        const double u = u_star * v;
        return u * std::exp(-total_exponent(u));
    };
    return u_star * u_star * integrate_semi_infinite(f, rel_tol);
}

}  // namespace detail

// Z-tilde^{(t,q)}(y) with 1-based tier indices.
inline double z_tilde(const NetworkSpec& net, size_t t, size_t q, double y) {
    if (t < 1 || t > net.num_tiers() || q < 1 || q > net.num_tiers())
        throw std::domain_error("z_tilde: tier index out of range");
    if (y < 0.0) throw std::domain_error("z_tilde: y >= 0 required");
    detail::multi_ctx ctx(net);
    return ctx.z_tilde(t - 1, q - 1, y);
}

inline RateResult tier_rate_limit(const NetworkSpec& net, size_t t_1based);

// Per-tier average rate R-tilde_t (1-based tier index).
inline RateResult tier_rate(const NetworkSpec& net, size_t t_1based) {
    if (t_1based < 1 || t_1based > net.num_tiers())
        throw std::domain_error("tier_rate: tier index out of range");
    detail::multi_ctx ctx(net);
    const size_t t = t_1based - 1;

    if (!(net.noise_power > 0.0)) {
        if (!equal_alpha(net))
            throw std::domain_error("tier_rate: noise_power > 0 required for mixed alpha");
        return tier_rate_limit(net, t_1based);
    }

    const double snr_t = net.snr(t_1based);
    const auto& T = net.tiers[t];

    if (equal_alpha(net)) {
        detail::gi_kernel kernel(T.alpha, pi * T.lambda / T.freq_bands, net.numerics);
        kahan_sum acc;
        for (size_t n = 0; n < ctx.gcq.size(); ++n) {
            const double zv = ctx.gcq.abscissas[n];
            const double w = ctx.gcq.weights[n];
            const double m0 = ctx.m0(t, zv);
            if (1.0 - m0 <= 0.0) continue;
            const double d = ctx.equal_alpha_denominator(t, zv);
            acc.add(w / zv * (1.0 - m0) * kernel.evaluate(zv / snr_t, d));
        }
        RateResult r;
        r.rate_nats = std::max(acc.value(), 0.0);
        r.method = (kernel.closed_form_available() &&
                    net.numerics.g_i_mode != GiMode::integral && !kernel.diag.fallback_used)
                       ? RateMethod::corollary1_closed
                       : RateMethod::theorem1_integral;
        r.diagnostics = kernel.diag;
        return r;
    }

    // General path: two-fold integral, outer GCQ in z = SNR_t y.
    RateDiagnostics diag;
    kahan_sum acc;
    std::vector<double> ztq(net.tiers.size());
    for (size_t n = 0; n < ctx.gcq.size(); ++n) {
        const double zv = ctx.gcq.abscissas[n];
        const double w = ctx.gcq.weights[n];
        const double m0 = ctx.m0(t, zv);
        if (1.0 - m0 <= 0.0) continue;
        const double y = zv / snr_t;
        for (size_t q = 0; q < net.tiers.size(); ++q) ztq[q] = ctx.z_tilde(t, q, y);
        ++diag.inner_integral_evals;
        const double inner = detail::general_inner(ctx, t, y, ztq, net.numerics.inner_rel_tol);
        acc.add(w / zv * (1.0 - m0) * inner);
    }
    RateResult r;
    r.rate_nats = std::max(2.0 * pi * (T.lambda / T.freq_bands) * acc.value(), 0.0);
    r.method = RateMethod::theorem1_integral;
    r.diagnostics = diag;
    return r;
}

// Network rate: sum of the per-tier rates.
inline RateResult network_rate(const NetworkSpec& net) {
    RateResult total;
    kahan_sum acc;
    for (size_t t = 1; t <= net.num_tiers(); ++t) {
        const RateResult r = tier_rate(net, t);
        acc.add(r.rate_nats);
        total.method = r.method;
        total.diagnostics.inner_integral_evals += r.diagnostics.inner_integral_evals;
        total.diagnostics.fallback_used |= r.diagnostics.fallback_used;
    }
    total.rate_nats = acc.value();
    return total;
}

// Dense-deployment / interference-limited upper bound for tier t (equal alpha).
inline RateResult tier_rate_limit(const NetworkSpec& net, size_t t_1based) {
    if (t_1based < 1 || t_1based > net.num_tiers())
        throw std::domain_error("tier_rate_limit: tier index out of range");
    if (!equal_alpha(net))
        throw std::domain_error("tier_rate_limit: all tiers must share alpha");
    detail::multi_ctx ctx(net);
    const size_t t = t_1based - 1;
    kahan_sum acc;
    for (size_t n = 0; n < ctx.gcq.size(); ++n) {
        const double zv = ctx.gcq.abscissas[n];
        const double w = ctx.gcq.weights[n];
        const double m0 = ctx.m0(t, zv);
        if (1.0 - m0 <= 0.0) continue;
        acc.add(w / zv * (1.0 - m0) / ctx.equal_alpha_denominator(t, zv));
    }
    RateResult r;
    r.rate_nats = std::max(acc.value(), 0.0);
    r.method = RateMethod::eq9a_limit;
    return r;
}

// High-SNR approximation for tier t (equal alpha): the limit minus the
// first-order 1/SNR_t correction.
inline RateResult tier_rate_high_snr(const NetworkSpec& net, size_t t_1based) {
    if (!(net.noise_power > 0.0))
        throw std::domain_error("tier_rate_high_snr: noise_power > 0 required");
    if (!equal_alpha(net))
        throw std::domain_error("tier_rate_high_snr: all tiers must share alpha");
    detail::multi_ctx ctx(net);
    const size_t t = t_1based - 1;
    const auto& T = net.tiers[t];
    const double half = 0.5 * T.alpha;
    const RateResult limit = tier_rate_limit(net, t_1based);
    kahan_sum acc;
    for (size_t n = 0; n < ctx.gcq.size(); ++n) {
        const double zv = ctx.gcq.abscissas[n];
        const double w = ctx.gcq.weights[n];
        const double m0 = ctx.m0(t, zv);
        if (1.0 - m0 <= 0.0) continue;
        acc.add(w * (1.0 - m0) *
                std::pow(ctx.equal_alpha_denominator(t, zv), -(1.0 + half)));
    }
    const double pl = pi * T.lambda / T.freq_bands;
    const double gap = std::pow(pl, -half) * std::exp(ln_gamma(1.0 + half)) /
                       net.snr(t_1based) * acc.value();
    RateResult r;
    r.rate_nats = limit.rate_nats - gap;
    r.method = RateMethod::corollary4_bound;
    return r;
}

// Correlated log-normal shadowing across the whole network: condition on the
// shared normal, substitute per-tier (mu, sigma), average by GHQ.
inline RateResult network_rate_correlated(const NetworkSpec& net, double rho,
                                          const QuadratureRule& outer_ghq) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::domain_error("network_rate_correlated: rho in [0,1] required");
    for (const auto& t : net.tiers)
        if (!has_lognormal_component(t.serving_fading) ||
            !has_lognormal_component(t.interferer_fading))
            throw std::domain_error("network_rate_correlated: fading must have a log-normal part");
    const double shrink = std::sqrt(1.0 - rho);
    kahan_sum acc;
    for (size_t e = 0; e < outer_ghq.size(); ++e) {
        const double x = std::sqrt(2.0) * outer_ghq.abscissas[e];
        NetworkSpec cond = net;
        for (auto& tier : cond.tiers) {
            const double mu_s = lognormal_mu_db(tier.serving_fading);
            const double sg_s = lognormal_sigma_db(tier.serving_fading);
            const double mu_i = lognormal_mu_db(tier.interferer_fading);
            const double sg_i = lognormal_sigma_db(tier.interferer_fading);
            tier.serving_fading = with_lognormal_params(tier.serving_fading,
                                                        mu_s + sg_s * std::sqrt(rho) * x,
                                                        sg_s * shrink);
            tier.interferer_fading = with_lognormal_params(tier.interferer_fading,
                                                           mu_i + sg_i * std::sqrt(rho) * x,
                                                           sg_i * shrink);
        }
        acc.add(outer_ghq.weights[e] * network_rate(cond).rate_nats);
    }
    RateResult r;
    r.rate_nats = acc.value() / sqrt_pi;
    r.method = RateMethod::theorem1_integral;
    return r;
}

}  // namespace hetnet
