#pragma once

// Transcendental functions needed by the rate integrals: gamma family,
// erfc, Gauss/confluent hypergeometrics, modified Bessel I0, and the
// G^{aD,aN}_{aN,aD} Meijer-G class with its small-argument expansion.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hetnet/common.hpp"
#include "hetnet/detail/gauss_kronrod.hpp"

namespace hetnet {

inline double ln_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("ln_gamma: requires x > 0");
#if defined(__GLIBC__) || defined(__linux__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

namespace detail {

// ln|Gamma(x)| and the sign of Gamma(x), valid away from the poles.
struct signed_ln_gamma {
    double ln_abs;
    int sign;
};

inline signed_ln_gamma ln_gamma_signed(double x) {
    if (x > 0.0) return {ln_gamma(x), 1};
    if (is_nonpositive_integer(x))
        throw std::domain_error("gamma: pole at non-positive integer");
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    const double s = std::sin(pi * x);
    const double ln_abs = std::log(pi / std::fabs(s)) - ln_gamma(1.0 - x);
    return {ln_abs, s > 0.0 ? 1 : -1};
}

inline double gamma_fn(double x) {
    const auto g = ln_gamma_signed(x);
    return g.sign * std::exp(g.ln_abs);
}

}  // namespace detail

inline double erfc(double x) { return std::erfc(x); }

// exp(x^2) * erfc(x) for x >= 0 without overflow.
inline double erfcx(double x) {
    if (x < 26.0) return std::exp(x * x) * std::erfc(x);
    // Asymptotic series, terms (2k-1)!!/(2x^2)^k; x >= 26 keeps it below 1e-16.
    const double ix2 = 1.0 / (2.0 * x * x);
    double term = 1.0, s = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -(2 * k - 1) * ix2;
        s += term;
    }
    return s / (x * sqrt_pi);
}

namespace detail {

// Regularized lower incomplete gamma P(a,x) by series, a > 0, x < a + 1.
inline double gamma_p_series(double a, double x) {
    if (x <= 0.0) return 0.0;
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 600; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
}

// Lentz continued fraction; Gamma(a,x) = cf * exp(-x + a ln x). Converges
// for x >= ~1 for any real a, and for x >= a+1 when a > 0.
inline double upper_gamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    return h;
}

// Gamma(0,x) = E1(x) for 0 < x < 1.
inline double e1_small(double x) {
    const double euler_gamma = 0.5772156649015328606;
    kahan_sum s;
    double term = -1.0;
    for (int k = 1; k < 60; ++k) {
        term *= -x / k;
        s.add(-term / k);
        if (std::fabs(term) < 1e-18) break;
    }
    return -euler_gamma - std::log(x) + s.value();
}

}  // namespace detail

// Upper incomplete gamma Gamma(z,x); z may be negative for x > 0.
inline double upper_incomplete_gamma(double z, double x) {
    if (x < 0.0) throw std::domain_error("upper_incomplete_gamma: x >= 0 required");
    if (x == 0.0) {
        if (z > 0.0) return std::exp(ln_gamma(z));
        throw std::domain_error("upper_incomplete_gamma: diverges at x = 0 for z <= 0");
    }
    if (z > 0.0) {
        if (x < z + 1.0)
            return std::exp(ln_gamma(z)) * (1.0 - detail::gamma_p_series(z, x));
        return detail::upper_gamma_cf(z, x) * std::exp(-x + z * std::log(x));
    }
    if (x >= 1.0) return detail::upper_gamma_cf(z, x) * std::exp(-x + z * std::log(x));
    // x < 1, z <= 0: recur down Gamma(z,x) = (Gamma(z+1,x) - x^z e^-x) / z.
    double g;
    double z0;  // start of the downward recurrence
    if (z == std::floor(z)) {
        g = detail::e1_small(x);
        z0 = 0.0;
    } else {
        z0 = z - std::floor(z);  // in (0,1)
        g = std::exp(ln_gamma(z0)) * (1.0 - detail::gamma_p_series(z0, x));
    }
    for (double zi = z0 - 1.0; zi >= z - 0.5; zi -= 1.0)
        g = (g - std::exp(zi * std::log(x) - x)) / zi;
    return g;
}

namespace detail {

inline double hyp2f1_series(double a, double b, double c, double z, int max_terms = 600) {
    kahan_sum s;
    s.add(1.0);
    double term = 1.0;
    for (int k = 0; k < max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        s.add(term);
        if (std::fabs(term) < std::fabs(s.value()) * 1e-17) return s.value();
    }
    if (std::fabs(term) > std::fabs(s.value()) * 1e-12)
        throw series_error("2F1 series did not converge");
    return s.value();
}

// Terminating series when a (or b) is a non-positive integer.
inline double hyp2f1_polynomial(double a, double b, double c, double z) {
    const int n = static_cast<int>(-std::min(a, b));
    double term = 1.0;
    kahan_sum s;
    s.add(1.0);
    for (int k = 0; k < n; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        s.add(term);
    }
    return s.value();
}

// 2F1(a,1;c;z) via the Euler integral after u = (1-t)^{c-1}: the integrand
// (1 - z + z u^{1/(c-1)})^{-a} is bounded on [0,1]. Needs c > 1.
inline double hyp2f1_b1_integral(double a, double c, double z) {
    const double p = 1.0 / (c - 1.0);
    auto f = [&](double u) { return std::pow(1.0 - z + z * std::pow(u, p), -a); };
    return integrate_adaptive(f, 0.0, 1.0, 1e-13, 4000);
}

}  // namespace detail

// Gauss hypergeometric 2F1(a,b;c;z) for real parameters, 0 <= z < 1.
inline double gauss_2f1(double a, double b, double c, double z) {
    if (is_nonpositive_integer(c)) throw std::domain_error("2F1: c must not be a non-positive integer");
    if (!(z >= 0.0 && z < 1.0)) throw std::domain_error("2F1: z must lie in [0,1)");
    if (z == 0.0) return 1.0;
    if (is_nonpositive_integer(a) || is_nonpositive_integer(b))
        return detail::hyp2f1_polynomial(a, b, c, z);
    if (z <= 0.55) return detail::hyp2f1_series(a, b, c, z);

    const double d = c - a - b;
    const double dist = std::fabs(d - std::nearbyint(d));
    if (dist > 0.05) {
        // Linear 1-z transformation (DLMF 15.8.4).
        using detail::ln_gamma_signed;
        const auto gc = ln_gamma_signed(c);
        const auto gd = ln_gamma_signed(d);
        const auto gca = ln_gamma_signed(c - a);
        const auto gcb = ln_gamma_signed(c - b);
        const auto gmd = ln_gamma_signed(-d);
        const auto ga = ln_gamma_signed(a);
        const auto gb = ln_gamma_signed(b);
        const double w = 1.0 - z;
        const double c1 = gc.sign * gd.sign * gca.sign * gcb.sign *
                          std::exp(gc.ln_abs + gd.ln_abs - gca.ln_abs - gcb.ln_abs);
        const double c2 = gc.sign * gmd.sign * ga.sign * gb.sign *
                          std::exp(gc.ln_abs + gmd.ln_abs - ga.ln_abs - gb.ln_abs + d * std::log(w));
        return c1 * detail::hyp2f1_series(a, b, 1.0 - d, w) +
               c2 * detail::hyp2f1_series(c - a, c - b, d + 1.0, w);
    }
    // c-a-b at or near an integer: logarithmic regime of the connection formula.
    if (b == 1.0 && c > 1.0) {
        if (is_nonpositive_integer(c - a))  // Euler transform terminates exactly
            return std::pow(1.0 - z, c - a - 1.0) *
                   detail::hyp2f1_polynomial(c - a, c - 1.0, c, z);
        return detail::hyp2f1_b1_integral(a, c, z);
    }
    if (a == 1.0 && c > 1.0) {
        if (is_nonpositive_integer(c - b))
            return std::pow(1.0 - z, c - b - 1.0) *
                   detail::hyp2f1_polynomial(c - b, c - 1.0, c, z);
        return detail::hyp2f1_b1_integral(b, c, z);
    }
    // General near-integer case outside the shapes this project uses: the
    // Euler-transformed series still converges for z in [0,1) since its
    // parameter excess is a+b-c > 0 here.
    return std::pow(1.0 - z, d) * detail::hyp2f1_series(c - a, c - b, c, z, 20000);
}

// Confluent hypergeometric 1F1(a;b;z) (Kummer M), z >= 0.
inline double kummer_1f1(double a, double b, double z) {
    if (is_nonpositive_integer(b)) throw std::domain_error("1F1: b must not be a non-positive integer");
    if (z == 0.0) return 1.0;
    if (z < 0.0) throw std::domain_error("1F1: z >= 0 required");
    if (a == b) return std::exp(z);
    if (is_nonpositive_integer(a)) {
        const int n = static_cast<int>(-a);
        double term = 1.0;
        kahan_sum s;
        s.add(1.0);
        for (int k = 0; k < n; ++k) {
            term *= (a + k) / ((b + k) * (k + 1.0)) * z;
            s.add(term);
        }
        return s.value();
    }
    if (a == 1.0 && b > 1.0 && z > 60.0) {
        // M(1,b,z) = (b-1) e^z z^{1-b} [Gamma(b-1) - Gamma(b-1,z)]; the upper
        // tail is below e^-60 so the subtraction is benign.
        const double g = std::exp(ln_gamma(b - 1.0)) - upper_incomplete_gamma(b - 1.0, z);
        return std::exp(z + (1.0 - b) * std::log(z) + std::log(b - 1.0) + std::log(g));
    }
    // Direct series; all terms positive for a,b > 0.
    kahan_sum s;
    s.add(1.0);
    double term = 1.0;
    for (int k = 0; k < 3000; ++k) {
        term *= (a + k) / ((b + k) * (k + 1.0)) * z;
        s.add(term);
        if (std::fabs(term) < std::fabs(s.value()) * 1e-17) return s.value();
    }
    throw series_error("1F1 series did not converge");
}

// Modified Bessel I0(x), x >= 0.
inline double bessel_i0(double x) {
    if (x < 0.0) throw std::domain_error("bessel_i0: x >= 0 required");
    if (x <= 18.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        kahan_sum s;
        s.add(1.0);
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            s.add(term);
            if (term < s.value() * 1e-17) break;
        }
        return s.value();
    }
    // Scaled asymptotic form I0(x) = e^x/sqrt(2 pi x) * sum ((2k-1)!!)^2/(k! (8x)^k).
    const double ix = 1.0 / (8.0 * x);
    double term = 1.0, s = 1.0;
    for (int k = 1; k <= 20; ++k) {
        const double num = (2.0 * k - 1.0) * (2.0 * k - 1.0);
        term *= num * ix / k;
        s += term;
        if (term < s * 1e-17) break;
    }
    return std::exp(x) * s / std::sqrt(2.0 * pi * x);
}

// Delta(n,x) = [x/n, (x+1)/n, ..., (x+n-1)/n].
inline std::vector<double> delta_list(int n, double x) {
    if (n < 1) throw std::domain_error("delta_list: n >= 1 required");
    std::vector<double> d(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)] = (x + i) / n;
    return d;
}

// Parameters of the G^{aD,aN}_{aN,aD}(z | Delta(aN,-nu); Delta(aD,0)) class
// used by the closed-form rate kernel; alpha/2 = alpha_num/alpha_den > 1 in
// lowest terms.
struct MeijerRateParams {
    int alpha_num;
    int alpha_den;

    MeijerRateParams(int num, int den) : alpha_num(num), alpha_den(den) {
        if (num <= 0 || den <= 0) throw std::domain_error("MeijerRateParams: positive integers required");
        if (std::gcd(num, den) != 1) throw std::domain_error("MeijerRateParams: must be in lowest terms");
        if (num <= den) throw std::domain_error("MeijerRateParams: alpha/2 > 1 required");
    }

    double alpha_half() const { return static_cast<double>(alpha_num) / alpha_den; }
    double nu_alpha() const { return alpha_half() - 1.0; }
};

// Evaluates the Meijer-G instance by the residue (Slater) expansion of the
// argument-inverted form: with zeta = 1/z the series in zeta is entire
// because aD < aN. Throws numeric_instability_error on overflow or when the
// cross-term cancellation eats more than ~8 digits (small z).
inline double meijer_g_rate(const MeijerRateParams& p, double z) {
    if (!(z > 0.0)) throw std::domain_error("meijer_g_rate: z > 0 required");
    const int aN = p.alpha_num, aD = p.alpha_den;
    const double nu = p.nu_alpha();
    const double zeta = 1.0 / z;
    const double w = (aN % 2 == 0) ? zeta : -zeta;

    const auto dN = delta_list(aN, -nu);
    const auto dD = delta_list(aD, 0.0);
    std::vector<double> at(static_cast<size_t>(aD)), bt(static_cast<size_t>(aN));
    for (int j = 0; j < aD; ++j) at[static_cast<size_t>(j)] = 1.0 - dD[static_cast<size_t>(j)];
    for (int h = 0; h < aN; ++h) bt[static_cast<size_t>(h)] = 1.0 - dN[static_cast<size_t>(h)];

    kahan_sum total;
    double max_piece = 0.0;
    for (int h = 0; h < aN; ++h) {
        const double bh = bt[static_cast<size_t>(h)];
        double ln_c = 0.0;
        int sign = 1;
        for (int k = 0; k < aN; ++k) {
            if (k == h) continue;
            const auto g = detail::ln_gamma_signed(bt[static_cast<size_t>(k)] - bh);
            ln_c += g.ln_abs;
            sign *= g.sign;
        }
        std::vector<double> num(static_cast<size_t>(aD));
        for (int j = 0; j < aD; ++j) {
            const double arg = 1.0 + bh - at[static_cast<size_t>(j)];
            const auto g = detail::ln_gamma_signed(arg);
            ln_c += g.ln_abs;
            sign *= g.sign;
            num[static_cast<size_t>(j)] = arg;
        }
        std::vector<double> den;
        den.reserve(static_cast<size_t>(aN - 1));
        for (int k = 0; k < aN; ++k)
            if (k != h) den.push_back(1.0 + bh - bt[static_cast<size_t>(k)]);

        // pFq series in w, p = aD <= q-1 = aN-1, entire.
        kahan_sum f;
        f.add(1.0);
        double term = 1.0, max_term = 1.0;
        for (int t = 0; t < 800; ++t) {
            double fac = w / (t + 1.0);
            for (const double u : num) fac *= u + t;
            for (const double v : den) fac /= v + t;
            term *= fac;
            if (!std::isfinite(term) || std::fabs(term) > 1e290)
                throw numeric_instability_error("meijer_g_rate: series term overflow");
            f.add(term);
            max_term = std::max(max_term, std::fabs(term));
            if (std::fabs(term) < std::fabs(f.value()) * 1e-17 &&
                std::fabs(term) < max_term * 1e-17)
                break;
        }
        const double piece = sign * std::exp(ln_c + bh * std::log(zeta)) * f.value();
        if (!std::isfinite(piece))
            throw numeric_instability_error("meijer_g_rate: non-finite residue term");
        max_piece = std::max(max_piece, std::fabs(piece));
        total.add(piece);
    }
    const double u = total.value();
    if (!std::isfinite(u) || (max_piece > 0.0 && std::fabs(u) < max_piece * 3e-7))
        throw numeric_instability_error("meijer_g_rate: cancellation exceeds tolerance");
    return u;
}

// Leading small-argument expansion of the same Meijer-G instance (the
// z -> 0+ limit with the residual pFq factor replaced by 1).
inline double meijer_g_asymptote(const MeijerRateParams& p, double z) {
    if (!(z > 0.0)) throw std::domain_error("meijer_g_asymptote: z > 0 required");
    const int aN = p.alpha_num, aD = p.alpha_den;
    const auto dN = delta_list(aN, -p.nu_alpha());
    const auto dD = delta_list(aD, 0.0);
    kahan_sum total;
    for (int q = 0; q < aD; ++q) {
        double ln_t = dD[static_cast<size_t>(q)] * std::log(z);
        int sign = 1;
        for (int r = 0; r < aD; ++r) {
            if (r == q) continue;
            const auto g = detail::ln_gamma_signed(dD[static_cast<size_t>(r)] - dD[static_cast<size_t>(q)]);
            ln_t += g.ln_abs;
            sign *= g.sign;
        }
        for (int s = 0; s < aN; ++s) {
            const auto g = detail::ln_gamma_signed(1.0 + dD[static_cast<size_t>(q)] - dN[static_cast<size_t>(s)]);
            ln_t += g.ln_abs;
            sign *= g.sign;
        }
        total.add(sign * std::exp(ln_t));
    }
    return total.value();
}

}  // namespace hetnet
