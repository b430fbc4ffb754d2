#pragma once

// Gauss-Chebyshev rule mapped onto (0,inf), Gauss-Hermite nodes, and an
// adaptive semi-infinite integrator for the integrals without closed forms.

#include <cmath>
#include <vector>

#include "hetnet/common.hpp"
#include "hetnet/detail/gauss_kronrod.hpp"

namespace hetnet {

enum class rule_kind { gauss_chebyshev_mapped, gauss_hermite };

struct QuadratureRule {
    std::vector<double> weights;
    std::vector<double> abscissas;
    rule_kind kind;

    size_t size() const { return weights.size(); }
};

// Mapped Gauss-Chebyshev rule: sum_n w_n f(s_n) ~ int_0^inf f(y) dy with
//   s_n = tan(pi/4 cos((2n-1)pi/(2N)) + pi/4)
//   w_n = pi^2 sin((2n-1)pi/(2N)) / (4N cos^2(pi/4 cos((2n-1)pi/(2N)) + pi/4))
inline QuadratureRule gcq_nodes(int n_points) {
    if (n_points < 1) throw std::domain_error("gcq_nodes: n_points >= 1 required");
    QuadratureRule r;
    r.kind = rule_kind::gauss_chebyshev_mapped;
    r.weights.resize(static_cast<size_t>(n_points));
    r.abscissas.resize(static_cast<size_t>(n_points));
    const double n_inv = 1.0 / n_points;
    for (int n = 1; n <= n_points; ++n) {
        const double theta = (2.0 * n - 1.0) * pi * 0.5 * n_inv;
        const double phi = 0.25 * pi * std::cos(theta) + 0.25 * pi;
        const double cp = std::cos(phi);
        r.abscissas[static_cast<size_t>(n - 1)] = std::tan(phi);
        r.weights[static_cast<size_t>(n - 1)] =
            pi * pi * std::sin(theta) * n_inv / (4.0 * cp * cp);
    }
    return r;
}

namespace detail {

// Orthonormal Hermite polynomials w.r.t. exp(-x^2); returns p_n(x) and fills
// christoffel with sum_{k<n} p_k(x)^2.
inline double hermite_orthonormal(int n, double x, double* christoffel = nullptr) {
    double pkm1 = 0.0;
    double pk = std::pow(pi, -0.25);
    double sum = pk * pk;
    for (int k = 0; k < n; ++k) {
        const double pkp1 = x * std::sqrt(2.0 / (k + 1.0)) * pk -
                            std::sqrt(static_cast<double>(k) / (k + 1.0)) * pkm1;
        pkm1 = pk;
        pk = pkp1;
        if (k + 1 < n) sum += pk * pk;
    }
    if (christoffel) *christoffel = sum;
    return pk;
}

}  // namespace detail

// Gauss-Hermite rule: sum_n w_n f(x_n) ~ int exp(-x^2) f(x) dx, 1 <= n <= 64.
// Nodes are found by interlaced bisection plus Newton polish, so any order in
// range is available without tables.
inline QuadratureRule ghq_nodes(int n_points) {
    if (n_points < 1 || n_points > 64)
        throw std::domain_error("ghq_nodes: 1 <= n_points <= 64 required");
    std::vector<double> roots{};
    for (int n = 1; n <= n_points; ++n) {
        std::vector<double> next(static_cast<size_t>(n));
        const double bound = std::sqrt(2.0 * n + 1.0) + 1.0;
        std::vector<double> brackets;
        brackets.push_back(-bound);
        for (double r : roots) brackets.push_back(r);
        brackets.push_back(bound);
        for (int i = 0; i < n; ++i) {
            double lo = brackets[static_cast<size_t>(i)];
            double hi = brackets[static_cast<size_t>(i + 1)];
            double flo = detail::hermite_orthonormal(n, lo);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = detail::hermite_orthonormal(n, mid);
                if ((fm > 0) == (flo > 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if (hi - lo < 1e-14) break;
            }
            double x = 0.5 * (lo + hi);
            for (int it = 0; it < 8; ++it) {  // Newton with p_n' = sqrt(2n) p_{n-1}
                const double pn = detail::hermite_orthonormal(n, x);
                const double dp = std::sqrt(2.0 * n) * detail::hermite_orthonormal(n - 1, x);
                const double step = pn / dp;
                x -= step;
                if (std::fabs(step) < 1e-16 * (1.0 + std::fabs(x))) break;
            }
            next[static_cast<size_t>(i)] = x;
        }
        roots = std::move(next);
    }
    QuadratureRule r;
    r.kind = rule_kind::gauss_hermite;
    r.abscissas = roots;
    r.weights.resize(static_cast<size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        double chris = 0.0;
        detail::hermite_orthonormal(n_points, roots[static_cast<size_t>(i)], &chris);
        r.weights[static_cast<size_t>(i)] = 1.0 / chris;
    }
    // enforce exact symmetry
    for (int i = 0; i < n_points / 2; ++i) {
        const int j = n_points - 1 - i;
        const double a = 0.5 * (r.abscissas[static_cast<size_t>(j)] - r.abscissas[static_cast<size_t>(i)]);
        r.abscissas[static_cast<size_t>(i)] = -a;
        r.abscissas[static_cast<size_t>(j)] = a;
        const double w = 0.5 * (r.weights[static_cast<size_t>(i)] + r.weights[static_cast<size_t>(j)]);
        r.weights[static_cast<size_t>(i)] = w;
        r.weights[static_cast<size_t>(j)] = w;
    }
    if (n_points % 2 == 1) r.abscissas[static_cast<size_t>(n_points / 2)] = 0.0;
    return r;
}

// int_0^inf f(x) dx for integrable, eventually decaying f. Maps x = u/(1-u)
// and subdivides adaptively; the initial geometric seed panels catch
// integrands concentrated at scales down to ~1e-12.
template <class F>
double integrate_semi_infinite(const F& f, double rel_tol = 1e-8, int max_panels = 2000) {
    auto g = [&](double u) {
        const double one_m = 1.0 - u;
        const double x = u / one_m;
        return f(x) / (one_m * one_m);
    };
    std::vector<double> breaks;
    breaks.push_back(0.0);
    for (int k = 40; k >= 1; --k) breaks.push_back(std::ldexp(1.0, -k));
    breaks.push_back(0.75);
    breaks.push_back(0.9);
    breaks.push_back(0.99);
    breaks.push_back(1.0);
    return detail::integrate_adaptive_seeded(g, breaks, rel_tol, max_panels);
}

}  // namespace hetnet
