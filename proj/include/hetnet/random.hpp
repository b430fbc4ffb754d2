#pragma once

// Counter-based random streams for reproducible, order-independent trials:
// stream(seed, index) is a pure function, so trials can run on any thread in
// any order and still replay bit-exactly.

#include <cmath>
#include <cstdint>

#include "hetnet/common.hpp"

namespace hetnet {

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

// xoshiro256++ seeded from (seed, stream index) through splitmix64.
class rng_stream {
  public:
    rng_stream(uint64_t seed, uint64_t index) {
        uint64_t sm = seed ^ (index * 0xd6e8feb86659fd93ULL + 0xa3ec647659359acdULL);
        for (auto& w : s_) w = detail::splitmix64(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    uint64_t next_u64() {
        const uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // uniform in (0,1); never returns 0 or 1
    double uniform() {
        const uint64_t u = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    uint32_t bounded(uint32_t n) {
        return static_cast<uint32_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    double exponential() { return -std::log(uniform()); }

    // standard normal via the polar method; the spare is cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double fac = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * fac;
        has_spare_ = true;
        return u * fac;
    }

    // Gamma(shape, 1) by Marsaglia-Tsang; shape >= 0.05 or so
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Poisson(mean) — inversion for small means, PTRD (Hormann) otherwise
    uint64_t poisson(double mean) {
        if (mean < 12.0) {
            const double l = std::exp(-mean);
            uint64_t k = 0;
            double p = uniform();
            while (p > l) {
                ++k;
                p *= uniform();
            }
            return k;
        }
        return poisson_ptrd(mean);
    }

  private:
    uint64_t poisson_ptrd(double mu) {
        const double smu = std::sqrt(mu);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u;
            double v = uniform();
            if (v <= 0.86 * v_r) {
                u = v / v_r - 0.43;
                return static_cast<uint64_t>(std::floor(
                    (2.0 * a / (0.5 - std::fabs(u)) + b) * u + mu + 0.445));
            }
            if (v >= v_r) {
                u = uniform() - 0.5;
            } else {
                u = v / v_r - 0.93;
                u = (u < 0 ? -0.5 : 0.5) - u;
                v = uniform() * v_r;
            }
            const double us = 0.5 - std::fabs(u);
            if (us < 0.013 && v > us) continue;
            const double k = std::floor((2.0 * a / us + b) * u + mu + 0.445);
            v = v * inv_alpha / (a / (us * us) + b);
            if (k >= 10.0) {
                const double log_sqrt_2pi = 0.91893853320467274178;
                if (std::log(v * smu) <=
                    (k + 0.5) * std::log(mu / k) - mu - log_sqrt_2pi + k -
                        (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k)
                    return static_cast<uint64_t>(k);
            } else if (k >= 0.0) {
                double lf = 0.0;  // log k!
                for (int i = 2; i <= static_cast<int>(k); ++i) lf += std::log(static_cast<double>(i));
                if (std::log(v) <= k * std::log(mu) - mu - lf)
                    return static_cast<uint64_t>(k);
            }
        }
    }

    uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hetnet
