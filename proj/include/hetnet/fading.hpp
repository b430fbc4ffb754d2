#pragma once

// Fading-distribution catalogue: per-model MGF, the exclusion-region series
// term T_I (closed forms plus the generic series fallback), moment-MGF
// E{g^{k+1} e^{-sg}}, and sampling for the simulator.

#include <cmath>
#include <variant>
#include <vector>

#include "hetnet/common.hpp"
#include "hetnet/quadrature.hpp"
#include "hetnet/random.hpp"
#include "hetnet/specfun.hpp"

namespace hetnet {

// mu (dB) giving E{g} = 1 for a log-normal power with std dev sigma (dB).
inline double unit_mean_mu_db(double sigma_db) {
    if (sigma_db < 0.0) throw std::domain_error("unit_mean_mu_db: sigma >= 0 required");
    return -ln10 * sigma_db * sigma_db / 20.0;
}

struct Rayleigh {
    double omega = 1.0;
};
struct Nakagami {
    double m = 1.0;
    double omega = 1.0;
};
struct LogNormal {
    double mu_db;
    double sigma_db;
    static LogNormal unit_mean(double sigma_db) { return {unit_mean_mu_db(sigma_db), sigma_db}; }
};
struct NakagamiLogNormal {
    double m;
    double mu_db;
    double sigma_db;
    static NakagamiLogNormal unit_mean(double m, double sigma_db) {
        return {m, unit_mean_mu_db(sigma_db), sigma_db};
    }
};
struct RiceLogNormal {
    double k_factor;  // linear
    double mu_db;
    double sigma_db;
    static RiceLogNormal unit_mean(double k, double sigma_db) {
        return {k, unit_mean_mu_db(sigma_db), sigma_db};
    }
};

using FadingModel = std::variant<Rayleigh, Nakagami, LogNormal, NakagamiLogNormal, RiceLogNormal>;

struct SeriesControl {
    int max_terms = 100;
    double rel_stop = 1e-12;
};

inline void validate(const FadingModel& model) {
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                if (!(f.omega > 0.0)) throw std::domain_error("Rayleigh: omega > 0 required");
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                if (!(f.m >= 0.5)) throw std::domain_error("Nakagami: m >= 0.5 required");
                if (!(f.omega > 0.0)) throw std::domain_error("Nakagami: omega > 0 required");
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                if (!(f.sigma_db >= 0.0)) throw std::domain_error("LogNormal: sigma >= 0 required");
            } else if constexpr (std::is_same_v<T, NakagamiLogNormal>) {
                if (!(f.m >= 0.5)) throw std::domain_error("NakagamiLogNormal: m >= 0.5 required");
                if (!(f.sigma_db >= 0.0)) throw std::domain_error("NakagamiLogNormal: sigma >= 0 required");
            } else {
                if (!(f.k_factor >= 0.0)) throw std::domain_error("RiceLogNormal: K >= 0 required");
                if (!(f.sigma_db >= 0.0)) throw std::domain_error("RiceLogNormal: sigma >= 0 required");
            }
        },
        model);
}

inline bool has_lognormal_component(const FadingModel& model) {
    return std::holds_alternative<LogNormal>(model) ||
           std::holds_alternative<NakagamiLogNormal>(model) ||
           std::holds_alternative<RiceLogNormal>(model);
}

// Returns a copy with the log-normal parameters replaced; identity for
// models without a shadowing component.
inline FadingModel with_lognormal_params(const FadingModel& model, double mu_db, double sigma_db) {
    FadingModel out = model;
    if (auto* ln = std::get_if<LogNormal>(&out)) {
        ln->mu_db = mu_db;
        ln->sigma_db = sigma_db;
    } else if (auto* nl = std::get_if<NakagamiLogNormal>(&out)) {
        nl->mu_db = mu_db;
        nl->sigma_db = sigma_db;
    } else if (auto* rl = std::get_if<RiceLogNormal>(&out)) {
        rl->mu_db = mu_db;
        rl->sigma_db = sigma_db;
    }
    return out;
}

inline double lognormal_mu_db(const FadingModel& model) {
    if (auto* ln = std::get_if<LogNormal>(&model)) return ln->mu_db;
    if (auto* nl = std::get_if<NakagamiLogNormal>(&model)) return nl->mu_db;
    if (auto* rl = std::get_if<RiceLogNormal>(&model)) return rl->mu_db;
    throw std::domain_error("model has no log-normal component");
}

inline double lognormal_sigma_db(const FadingModel& model) {
    if (auto* ln = std::get_if<LogNormal>(&model)) return ln->sigma_db;
    if (auto* nl = std::get_if<NakagamiLogNormal>(&model)) return nl->sigma_db;
    if (auto* rl = std::get_if<RiceLogNormal>(&model)) return rl->sigma_db;
    throw std::domain_error("model has no log-normal component");
}

// Rice K -> Nakagami m mapping, (1+K)^2/(1+2K).
inline double rice_to_nakagami_m(double k_factor) {
    if (k_factor < 0.0) throw std::domain_error("rice_to_nakagami_m: K >= 0 required");
    return (1.0 + k_factor) * (1.0 + k_factor) / (1.0 + 2.0 * k_factor);
}

namespace detail {

// Gauss-Hermite images of the log-normal power: w_n = 10^{(sqrt2 sigma x_n + mu)/10}.
inline std::vector<double> lognormal_levels(double mu_db, double sigma_db, const QuadratureRule& ghq) {
    std::vector<double> w(ghq.size());
    const double c = ln10 / 10.0;
    for (size_t i = 0; i < ghq.size(); ++i)
        w[i] = std::exp(c * (std::sqrt(2.0) * sigma_db * ghq.abscissas[i] + mu_db));
    return w;
}

// one node-term of Eq-14-type: w e^{-wy} 1F1(1, b, w y), fused so the huge
// exponentials cancel analytically for large w y.
inline double ln_t_node(double w, double y, double b) {
    const double x = w * y;
    if (x <= 60.0) return w * std::exp(-x) * kummer_1f1(1.0, b, x);
    // e^{-x} M(1,b,x) = (b-1) x^{1-b} [Gamma(b-1) - Gamma(b-1,x)]
    const double g = std::exp(ln_gamma(b - 1.0)) - upper_incomplete_gamma(b - 1.0, x);
    return w * (b - 1.0) * std::pow(x, 1.0 - b) * g;
}

inline double gamma_t_term(double m, double rate, double alpha, double y) {
    // Proposition-1 shape with Gamma(m, mean m/rate): rate = m/Omega
    const double c = 2.0 - 2.0 / alpha;
    const double x = y / (y + rate);
    const double f = gauss_2f1(m + 1.0, 1.0, c, x);
    return std::exp(std::log(m) + m * std::log(rate) + std::log(y) -
                    (m + 1.0) * std::log(y + rate)) /
           (1.0 - 2.0 / alpha) * f;
}

}  // namespace detail

// MGF M(s) = E{exp(-s g)}; the GHQ rule is used by the shadowed variants.
inline double mgf(const FadingModel& model, double s, const QuadratureRule& ghq) {
    if (s < 0.0) throw std::domain_error("mgf: s >= 0 required");
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return 1.0 / (1.0 + s * f.omega);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return std::exp(-f.m * std::log1p(s * f.omega / f.m));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i)
                    acc.add(ghq.weights[i] * std::exp(-w[i] * s));
                return acc.value() / sqrt_pi;
            } else if constexpr (std::is_same_v<T, NakagamiLogNormal>) {
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i)
                    acc.add(ghq.weights[i] * std::exp(-f.m * std::log1p(s * w[i] / f.m)));
                return acc.value() / sqrt_pi;
            } else {
                const double k = f.k_factor;
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i) {
                    const double den = 1.0 + k + s * w[i];
                    acc.add(ghq.weights[i] * (1.0 + k) / den * std::exp(-s * w[i] * k / den));
                }
                return acc.value() / sqrt_pi;
            }
        },
        model);
}

// Moment-MGF M^{(k)}(s) = E{g^{k+1} exp(-s g)}.
inline double moment_mgf(const FadingModel& model, int k, double s, const QuadratureRule& ghq) {
    if (k < 0) throw std::domain_error("moment_mgf: k >= 0 required");
    if (s < 0.0) throw std::domain_error("moment_mgf: s >= 0 required");
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Rayleigh> || std::is_same_v<T, Nakagami>) {
                double m = 1.0, omega = 1.0;
                if constexpr (std::is_same_v<T, Nakagami>) {
                    m = f.m;
                    omega = f.omega;
                } else {
                    omega = f.omega;
                }
                const double r = m / omega;
                return std::exp(m * std::log(r) + ln_gamma(m + k + 1.0) - ln_gamma(m) -
                                (m + k + 1.0) * std::log(s + r));
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i)
                    acc.add(ghq.weights[i] * std::exp((k + 1.0) * std::log(w[i]) - w[i] * s));
                return acc.value() / sqrt_pi;
            } else if constexpr (std::is_same_v<T, NakagamiLogNormal>) {
                const double m = f.m;
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i) {
                    const double om = 1.0 / w[i];
                    acc.add(ghq.weights[i] *
                            std::exp(m * std::log(om) - (m + k + 1.0) * std::log(s + m * om)));
                }
                return acc.value() / sqrt_pi *
                       std::exp(m * std::log(m) + ln_gamma(m + k + 1.0) - ln_gamma(m));
            } else {
                const double kf = f.k_factor;
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i) {
                    const double om = 1.0 / w[i];
                    const double c = kf * (1.0 + kf) / (1.0 + kf + s / om);
                    acc.add(ghq.weights[i] * om *
                            std::exp(ln_gamma(k + 2.0) - (k + 2.0) * std::log(s + (1.0 + kf) * om)) *
                            kummer_1f1(k + 2.0, 1.0, c));
                }
                return acc.value() / sqrt_pi * (1.0 + kf) * std::exp(-kf);
            }
        },
        model);
}

// Exclusion-region series term T_I(y) by the per-model closed forms.
inline double t_i(const FadingModel& model, double alpha, double y, const QuadratureRule& ghq,
                  const SeriesControl& ctl = {}) {
    if (!(alpha > 2.0)) throw std::domain_error("t_i: alpha > 2 required");
    if (y < 0.0) throw std::domain_error("t_i: y >= 0 required");
    if (y == 0.0) return 0.0;
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return detail::gamma_t_term(1.0, 1.0 / f.omega, alpha, y);
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return detail::gamma_t_term(f.m, f.m / f.omega, alpha, y);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                const double b = 2.0 - 2.0 / alpha;
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i)
                    acc.add(ghq.weights[i] * detail::ln_t_node(w[i], y, b));
                return acc.value() * y / (sqrt_pi * (1.0 - 2.0 / alpha));
            } else if constexpr (std::is_same_v<T, NakagamiLogNormal>) {
                const double m = f.m;
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i)
                    acc.add(ghq.weights[i] * detail::gamma_t_term(m, m / w[i], alpha, y));
                return acc.value() / sqrt_pi;
            } else {
                const double kf = f.k_factor;
                if (kf == 0.0) {
                    NakagamiLogNormal suzuki{1.0, f.mu_db, f.sigma_db};
                    return t_i(FadingModel{suzuki}, alpha, y, ghq, ctl);
                }
                // Composite Rice/log-normal: GHQ outer sum, l-series inner.
                const double c = 2.0 - 2.0 / alpha;
                const auto w = detail::lognormal_levels(f.mu_db, f.sigma_db, ghq);
                kahan_sum acc;
                for (size_t i = 0; i < w.size(); ++i) {
                    const double om = 1.0 / w[i];
                    const double den = y + (1.0 + kf) * om;
                    const double q = kf * (1.0 + kf) / (1.0 + kf + y / om);
                    const double x = y / den;
                    kahan_sum inner;
                    double pow_q = 1.0;  // q^l / l!
                    double last_rel = 0.0;
                    for (int l = 0; l < ctl.max_terms; ++l) {
                        const double term = (l + 1.0) * pow_q * gauss_2f1(l + 2.0, 1.0, c, x);
                        inner.add(term);
                        last_rel = std::fabs(term) / std::max(std::fabs(inner.value()), 1e-300);
                        if (l > 2 && last_rel < ctl.rel_stop) break;
                        pow_q *= q / (l + 1.0);
                    }
                    if (last_rel > 1e-6)
                        throw series_error("t_i: Rice/log-normal series not converged at max_terms");
                    acc.add(ghq.weights[i] * om / (den * den) * inner.value());
                }
                return acc.value() * (1.0 + kf) * std::exp(-kf) * y /
                       (sqrt_pi * (1.0 - 2.0 / alpha));
            }
        },
        model);
}

// Generic T_I fallback: the k-series of the theorem assembled from moment
// MGFs, applicable to any model at the cost of slower convergence.
inline double t_i_generic(const FadingModel& model, double alpha, double y,
                          const QuadratureRule& ghq, int max_terms = 200) {
    if (!(alpha > 2.0)) throw std::domain_error("t_i_generic: alpha > 2 required");
    if (y <= 0.0) return 0.0;
    const double b = 2.0 - 2.0 / alpha;
    kahan_sum acc;
    double ln_y = std::log(y);
    for (int k = 0; k < max_terms; ++k) {
        const double term =
            std::exp((k + 1.0) * ln_y - ln_gamma(b + k)) * moment_mgf(model, k, y, ghq);
        acc.add(term);
        if (k > 4 && std::fabs(term) < std::fabs(acc.value()) * 1e-14) break;
    }
    return std::exp(ln_gamma(1.0 - 2.0 / alpha)) * acc.value();
}

// One draw of the power gain g.
inline double sample(const FadingModel& model, rng_stream& rng) {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Rayleigh>) {
                return f.omega * rng.exponential();
            } else if constexpr (std::is_same_v<T, Nakagami>) {
                return rng.gamma(f.m) * (f.omega / f.m);
            } else if constexpr (std::is_same_v<T, LogNormal>) {
                const double x = f.mu_db + f.sigma_db * rng.normal();
                return std::exp(x * ln10 / 10.0);
            } else if constexpr (std::is_same_v<T, NakagamiLogNormal>) {
                const double x = f.mu_db + f.sigma_db * rng.normal();
                return std::exp(x * ln10 / 10.0) * rng.gamma(f.m) / f.m;
            } else {
                const double x = f.mu_db + f.sigma_db * rng.normal();
                const double w = std::exp(x * ln10 / 10.0);
                const double k = f.k_factor;
                const double sd = std::sqrt(0.5 / (1.0 + k));
                const double a = std::sqrt(k / (1.0 + k)) + sd * rng.normal();
                const double b = sd * rng.normal();
                return w * (a * a + b * b);
            }
        },
        model);
}

// Conditional draw used by the correlated-shadowing simulator: the
// small-scale part of `model` with its mean power forced to `mean_power`.
inline double sample_conditional(const FadingModel& model, double mean_power, rng_stream& rng) {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, LogNormal>) {
                return mean_power;
            } else if constexpr (std::is_same_v<T, NakagamiLogNormal>) {
                return mean_power * rng.gamma(f.m) / f.m;
            } else if constexpr (std::is_same_v<T, RiceLogNormal>) {
                const double k = f.k_factor;
                const double sd = std::sqrt(0.5 / (1.0 + k));
                const double a = std::sqrt(k / (1.0 + k)) + sd * rng.normal();
                const double b = sd * rng.normal();
                return mean_power * (a * a + b * b);
            } else {
                throw std::domain_error("sample_conditional: model has no shadowing component");
            }
        },
        model);
}

}  // namespace hetnet
