#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "hetnet/common.hpp"

namespace hetnet::detail {

// 7-15 Gauss-Kronrod pair on [a,b]; err is the standard |G7-K15| estimate.
template <class F>
double g7k15(const F& f, double a, double b, double& err) {
    static const double nodes[8] = {
        0.000000000000000, 0.405845151377397, 0.741531185599394, 0.949107912342759,
        0.207784955007898, 0.586087235467691, 0.864864423359769, 0.991455371120813};
    static const double wg[4] = {
        0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};
    static const double wk[8] = {
        0.209482141084728, 0.190350578064785, 0.140653259715525, 0.063092092629979,
        0.204432940075298, 0.169004726639267, 0.104790010322250, 0.022935322010529};

    const double mid = 0.5 * (a + b);
    const double hal = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7 = wg[0] * f0;
    double k15 = wk[0] * f0;
    for (int i = 1; i < 4; ++i) {
        const double dx = hal * nodes[i];
        const double fi = f(mid + dx) + f(mid - dx);
        g7 += wg[i] * fi;
        k15 += wk[i] * fi;
    }
    for (int i = 4; i < 8; ++i) {
        const double dx = hal * nodes[i];
        k15 += wk[i] * (f(mid + dx) + f(mid - dx));
    }
    g7 *= hal;
    k15 *= hal;
    err = 200.0 * std::fabs(k15 - g7);
    err *= std::sqrt(err);
    return k15;
}

struct panel {
    double a, b, value, err;
    bool operator<(const panel& o) const { return err < o.err; }
};

// Worst-interval-first adaptive integration over consecutive breakpoints.
// Deterministic for a given integrand and tolerance.
template <class F>
double integrate_adaptive_seeded(const F& f, const std::vector<double>& breaks,
                                 double rel_tol, int max_panels) {
    std::priority_queue<panel> q;
    double total = 0.0, total_err = 0.0;
    auto push = [&](double lo, double hi) {
        panel p;
        p.a = lo;
        p.b = hi;
        p.value = g7k15(f, lo, hi, p.err);
        total += p.value;
        total_err += p.err;
        q.push(p);
    };
    for (size_t i = 0; i + 1 < breaks.size(); ++i) push(breaks[i], breaks[i + 1]);
    int n = static_cast<int>(breaks.size()) - 1;
    while (!q.empty() && total_err > rel_tol * std::fabs(total) && total_err > 1e-300) {
        if (n >= max_panels)
            throw integration_error("adaptive integration: panel budget exhausted");
        const panel p = q.top();
        q.pop();
        total -= p.value;
        total_err -= p.err;
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {  // interval at machine resolution
            total += p.value;
            continue;
        }
        push(p.a, mid);
        push(mid, p.b);
        ++n;
    }
    return total;
}

template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol, int max_panels) {
    return integrate_adaptive_seeded(f, {a, b}, rel_tol, max_panels);
}

}  // namespace hetnet::detail
