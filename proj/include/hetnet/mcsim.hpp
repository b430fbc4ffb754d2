#pragma once

// Monte Carlo oracle: finite-disk PPP deployment, biased association, SINR
// assembly with frequency-band thinning, equi-correlated shadowing, and rate
// aggregation. Per-trial counter-based streams make the estimate independent
// of thread count and execution order.

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "hetnet/random.hpp"
#include "hetnet/rate_multi.hpp"

namespace hetnet {

struct McConfig {
    uint64_t n_trials = 100000;
    uint64_t master_seed = 1;
    std::optional<double> radius_override{};
    double correlation_rho = 0.0;
};

struct McEstimate {
    double mean_rate_nats = 0.0;
    double std_error = 0.0;
    uint64_t n_trials = 0;
    double radius_used = 0.0;
    uint64_t redraws = 0;
};

// Thread cap: HETNET_RATE_THREADS if set, else the machine parallelism.
inline unsigned resolve_thread_count() {
    if (const char* env = std::getenv("HETNET_RATE_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Smallest power-of-ten radius with lambda_min * R^2 >= 100.
inline double simulation_radius(const NetworkSpec& net) {
    validate(net);
    double lam_min = net.tiers.front().lambda;
    for (const auto& t : net.tiers) lam_min = std::min(lam_min, t.lambda);
    double r = 1.0;
    while (lam_min * r * r < 100.0) r *= 10.0;
    return r;
}

struct TierDeployment {
    std::vector<double> px, py;
    size_t size() const { return px.size(); }
};
using Deployment = std::vector<TierDeployment>;

// Poisson counts with uniform positions on the disk of the given radius.
inline void draw_deployment(const NetworkSpec& net, double radius, rng_stream& rng,
                            Deployment& out) {
    out.resize(net.tiers.size());
    for (size_t t = 0; t < net.tiers.size(); ++t) {
        const uint64_t n = rng.poisson(net.tiers[t].lambda * pi * radius * radius);
        auto& d = out[t];
        d.px.resize(n);
        d.py.resize(n);
        for (uint64_t b = 0; b < n; ++b) {
            double x, y;
            do {
                x = 2.0 * rng.uniform() - 1.0;
                y = 2.0 * rng.uniform() - 1.0;
            } while (x * x + y * y > 1.0);
            d.px[b] = x * radius;
            d.py[b] = y * radius;
        }
    }
}

inline Deployment draw_deployment(const NetworkSpec& net, double radius, rng_stream& rng) {
    Deployment dep;
    draw_deployment(net, radius, rng, dep);
    return dep;
}

struct Association {
    size_t tier;     // 0-based
    size_t index;    // BS index within the tier
    double dist_sq;  // squared distance of the serving BS
};

namespace detail {

inline double neg_pow_half(double d2, double half_alpha) {
    if (half_alpha == 2.0) return 1.0 / (d2 * d2);
    if (half_alpha == 2.5) return 1.0 / (d2 * d2 * std::sqrt(d2));
    if (half_alpha == 1.5) return 1.0 / (d2 * std::sqrt(d2));
    if (half_alpha == 3.0) return 1.0 / (d2 * d2 * d2);
    return std::pow(d2, -half_alpha);
}

}  // namespace detail

// Biased long-term association: the tier whose nearest BS maximizes
// P_t d^{-alpha_t} B_t; ties go to the lowest tier index. Empty deployments
// signal a redraw.
inline std::optional<Association> associate(const NetworkSpec& net, const Deployment& dep) {
    Association best{0, 0, 0.0};
    double best_metric = -1.0;
    bool found_all = true;
    for (size_t t = 0; t < net.tiers.size(); ++t) {
        if (dep[t].size() == 0) {
            found_all = false;
            break;
        }
        double d2min = std::numeric_limits<double>::infinity();
        size_t kmin = 0;
        for (size_t b = 0; b < dep[t].size(); ++b) {
            const double d2 = dep[t].px[b] * dep[t].px[b] + dep[t].py[b] * dep[t].py[b];
            if (d2 < d2min) {
                d2min = d2;
                kmin = b;
            }
        }
        if (d2min < 1e-24) {
            found_all = false;  // probability-zero coincidence with the origin
            break;
        }
        const double metric = net.tiers[t].power * net.tiers[t].bias *
                              detail::neg_pow_half(d2min, 0.5 * net.tiers[t].alpha);
        if (metric > best_metric) {
            best_metric = metric;
            best = Association{t, kmin, d2min};
        }
    }
    if (!found_all) return std::nullopt;
    return best;
}

// Equi-correlated log-normal mean powers sharing one common normal draw.
inline std::vector<double> draw_correlated_shadowing(size_t n, double mu_db, double sigma_db,
                                                     double rho, rng_stream& rng) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::domain_error("draw_correlated_shadowing: rho in [0,1] required");
    const double s_bar = rng.normal();
    std::vector<double> y(n);
    const double c = std::sqrt(rho) * sigma_db;
    const double s = std::sqrt(1.0 - rho) * sigma_db;
    for (size_t b = 0; b < n; ++b) {
        const double x = c * s_bar + s * rng.normal() + mu_db;
        y[b] = std::exp(x * ln10 / 10.0);
    }
    return y;
}

namespace detail {

// per-tier sampler, flattened from the variant so the hot loop avoids visits
struct fading_sampler {
    enum class kind { exponential, gamma, lognormal, nak_lognormal, rice_lognormal } k;
    double omega = 1.0;
    double m = 1.0;
    double mu_db = 0.0, sigma_db = 0.0;
    double rice_k = 0.0;

    static fading_sampler make(const FadingModel& f) {
        fading_sampler s;
        if (const auto* r = std::get_if<Rayleigh>(&f)) {
            s.k = kind::exponential;
            s.omega = r->omega;
        } else if (const auto* n = std::get_if<Nakagami>(&f)) {
            s.k = kind::gamma;
            s.m = n->m;
            s.omega = n->omega;
        } else if (const auto* l = std::get_if<LogNormal>(&f)) {
            s.k = kind::lognormal;
            s.mu_db = l->mu_db;
            s.sigma_db = l->sigma_db;
        } else if (const auto* nl = std::get_if<NakagamiLogNormal>(&f)) {
            s.k = kind::nak_lognormal;
            s.m = nl->m;
            s.mu_db = nl->mu_db;
            s.sigma_db = nl->sigma_db;
        } else {
            const auto* rl = std::get_if<RiceLogNormal>(&f);
            s.k = kind::rice_lognormal;
            s.rice_k = rl->k_factor;
            s.mu_db = rl->mu_db;
            s.sigma_db = rl->sigma_db;
        }
        return s;
    }

    bool shadowed() const { return k != kind::exponential && k != kind::gamma; }

    // independent draw; `shadow_mix` carries (sqrt(rho) S_bar, sqrt(1-rho))
    // when equi-correlated shadowing is active
    double draw(rng_stream& rng, const double* shadow_mix = nullptr) const {
        switch (k) {
            case kind::exponential:
                return omega * rng.exponential();
            case kind::gamma:
                return rng.gamma(m) * (omega / m);
            default:
                break;
        }
        double x;
        if (shadow_mix)
            x = mu_db + sigma_db * (shadow_mix[0] + shadow_mix[1] * rng.normal());
        else
            x = mu_db + sigma_db * rng.normal();
        const double w = std::exp(x * ln10 / 10.0);
        switch (k) {
            case kind::lognormal:
                return w;
            case kind::nak_lognormal:
                return w * rng.gamma(m) / m;
            default: {
                const double sd = std::sqrt(0.5 / (1.0 + rice_k));
                const double a = std::sqrt(rice_k / (1.0 + rice_k)) + sd * rng.normal();
                const double b = sd * rng.normal();
                return w * (a * a + b * b);
            }
        }
    }
};

struct trial_workspace {
    Deployment dep;
    std::vector<fading_sampler> serving;
    std::vector<fading_sampler> interferer;
    std::vector<double> half_alpha;
};

inline void init_workspace(const NetworkSpec& net, trial_workspace& ws) {
    ws.serving.clear();
    ws.interferer.clear();
    ws.half_alpha.clear();
    for (const auto& t : net.tiers) {
        ws.serving.push_back(fading_sampler::make(t.serving_fading));
        ws.interferer.push_back(fading_sampler::make(t.interferer_fading));
        ws.half_alpha.push_back(0.5 * t.alpha);
    }
}

}  // namespace detail

// Rate of one Monte Carlo trial: fading draws, band thinning, SINR, and the
// spectral 1/F_B factor of the tagged tier.
inline double trial_rate(const NetworkSpec& net, const Deployment& dep,
                         const Association& assoc, rng_stream& rng, double rho = 0.0) {
    thread_local detail::trial_workspace ws;
    detail::init_workspace(net, ws);

    double shadow_mix[2] = {0.0, 1.0};
    const bool correlated = rho > 0.0;
    if (correlated) {
        for (const auto& s : ws.serving)
            if (!s.shadowed())
                throw std::domain_error("trial_rate: correlated shadowing needs log-normal fading");
        for (const auto& s : ws.interferer)
            if (!s.shadowed())
                throw std::domain_error("trial_rate: correlated shadowing needs log-normal fading");
        shadow_mix[0] = std::sqrt(rho) * rng.normal();
        shadow_mix[1] = std::sqrt(1.0 - rho);
    }
    const double* mix = correlated ? shadow_mix : nullptr;

    const size_t st = assoc.tier;
    const double g0 = ws.serving[st].draw(rng, mix);
    const double signal =
        net.tiers[st].power * g0 * detail::neg_pow_half(assoc.dist_sq, ws.half_alpha[st]);

    const int fb_serving = net.tiers[st].freq_bands;
    const uint32_t band0 = fb_serving > 1 ? rng.bounded(static_cast<uint32_t>(fb_serving)) : 0;

    double interference = 0.0;
    for (size_t q = 0; q < net.tiers.size(); ++q) {
        const auto& tq = net.tiers[q];
        const auto& d = dep[q];
        const double p = tq.power;
        const double ha = ws.half_alpha[q];
        const auto& sampler = ws.interferer[q];
        const uint32_t fb = static_cast<uint32_t>(tq.freq_bands);
        const uint32_t ref_band = (q == st) ? band0 : 0;
        for (size_t b = 0; b < d.size(); ++b) {
            if (q == st && b == assoc.index) continue;
            if (fb > 1 && rng.bounded(fb) != ref_band) continue;
            const double d2 = d.px[b] * d.px[b] + d.py[b] * d.py[b];
            interference += p * sampler.draw(rng, mix) * detail::neg_pow_half(d2, ha);
        }
    }
    const double denom = net.noise_power + interference;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log1p(signal / denom) / fb_serving;
}

namespace detail {

struct trial_outcome {
    double rate;
    uint32_t redraws;
};

inline trial_outcome run_trial(const NetworkSpec& net, double radius, uint64_t seed,
                               uint64_t trial, double rho) {
    rng_stream rng(seed, trial);
    thread_local Deployment dep;
    uint32_t redraws = 0;
    for (;;) {
        draw_deployment(net, radius, rng, dep);
        const auto assoc = associate(net, dep);
        if (!assoc) {
            ++redraws;
            if (redraws > 1000)
                throw std::runtime_error("estimate_rate: repeated degenerate deployments");
            continue;
        }
        const double r = trial_rate(net, dep, *assoc, rng, rho);
        if (!std::isfinite(r)) {  // no noise and an empty co-band: condition away
            ++redraws;
            if (redraws > 1000)
                throw std::runtime_error("estimate_rate: repeated degenerate trials");
            continue;
        }
        return {r, redraws};
    }
}

}  // namespace detail

// Mean rate and standard error over n_trials independent trials; bit-exact
// for a fixed master_seed regardless of thread count.
inline McEstimate estimate_rate(const NetworkSpec& net, const McConfig& cfg,
                                unsigned threads = 0) {
    validate(net);
    if (cfg.n_trials < 1) throw std::domain_error("estimate_rate: n_trials >= 1 required");
    if (cfg.correlation_rho > 0.0) {
        for (const auto& t : net.tiers)
            if (!has_lognormal_component(t.serving_fading) ||
                !has_lognormal_component(t.interferer_fading))
                throw std::domain_error("estimate_rate: correlated shadowing needs log-normal fading");
    }
    const double radius = cfg.radius_override.value_or(simulation_radius(net));
    if (!(radius > 0.0)) throw std::domain_error("estimate_rate: radius must be positive");

    const uint64_t n = cfg.n_trials;
    std::vector<double> rates(n);
    std::vector<uint32_t> redraws(n);

    unsigned nthreads = threads > 0 ? threads : resolve_thread_count();
    nthreads = static_cast<unsigned>(std::min<uint64_t>(nthreads, n));

    std::atomic<uint64_t> next_chunk{0};
    const uint64_t chunk = std::max<uint64_t>(1, n / (nthreads * 16 + 1));
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&]() {
        try {
            for (;;) {
                const uint64_t begin = next_chunk.fetch_add(chunk);
                if (begin >= n) return;
                const uint64_t end = std::min(n, begin + chunk);
                for (uint64_t i = begin; i < end; ++i) {
                    const auto out = detail::run_trial(net, radius, cfg.master_seed, i,
                                                       cfg.correlation_rho);
                    rates[i] = out.rate;
                    redraws[i] = out.redraws;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(error_mu);
            if (!error) error = std::current_exception();
        }
    };
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    kahan_sum mean_acc;
    for (uint64_t i = 0; i < n; ++i) mean_acc.add(rates[i]);
    const double mean = mean_acc.value() / static_cast<double>(n);
    kahan_sum var_acc;
    for (uint64_t i = 0; i < n; ++i) {
        const double d = rates[i] - mean;
        var_acc.add(d * d);
    }
    uint64_t total_redraws = 0;
    for (uint64_t i = 0; i < n; ++i) total_redraws += redraws[i];

    McEstimate est;
    est.mean_rate_nats = mean;
    est.std_error = n > 1 ? std::sqrt(var_acc.value() / (static_cast<double>(n) *
                                                         static_cast<double>(n - 1)))
                          : 0.0;
    est.n_trials = n;
    est.radius_used = radius;
    est.redraws = total_redraws;
    return est;
}

}  // namespace hetnet
