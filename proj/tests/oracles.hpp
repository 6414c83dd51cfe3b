#pragma once

// Reference computations shared by the test suites. They deliberately avoid the
// library's own samplers and solvers.

#include <wptlab/types.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using wptlab::cplx;
using wptlab::CVector;

/// Time averages <y^i> of y(t) = sqrt(2) Re sum_n c_n e^{j 2 pi (k0 + n) t}, one
/// period sampled directly with std::cos. i = 0..6.
inline std::vector<double> multisine_moments(const CVector& c, int carrier_offset = 0) {
    const auto N = static_cast<int>(c.size());
    const int k0 = carrier_offset > 0 ? carrier_offset : 7 * N + 3;
    const int samples = 16 * (k0 + N) + 11;
    std::vector<long double> acc(7, 0.0L);
    for (int s = 0; s < samples; ++s) {
        long double y = 0.0L;
        for (int n = 0; n < N; ++n) {
            const long double ph = 2.0L * 3.14159265358979323846264338327950288L * (k0 + n) * s / samples;
            y += std::sqrt(2.0L) * (static_cast<long double>(c(n).real()) * std::cos(ph) -
                                    static_cast<long double>(c(n).imag()) * std::sin(ph));
        }
        long double p = 1.0L;
        for (int i = 0; i <= 6; ++i) {
            acc[static_cast<std::size_t>(i)] += p;
            p *= y;
        }
    }
    std::vector<double> out(7);
    for (int i = 0; i <= 6; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(acc[static_cast<std::size_t>(i)] / samples);
    return out;
}

/// Monte Carlo estimate of E|x|^k for a sampler.
template <class Draw>
double mc_abs_moment(Draw&& draw, int k, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    long double acc = 0.0L;
    for (int t = 0; t < trials; ++t) acc += std::pow(std::abs(draw(rng)), k);
    return static_cast<double>(acc / trials);
}

/// Fourth-order truncated diode output for real amplitudes u_n aligned in phase.
inline double aligned_vout(double b2, double b4, const std::vector<double>& u) {
    double quad = 0.0, quart = 0.0;
    const std::size_t n = u.size();
    for (double v : u) quad += v * v;
    for (std::size_t k = 0; k + 1 < 2 * n; ++k) {
        double ck = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            if (k >= a && k - a < n) ck += u[a] * u[k - a];
        quart += ck * ck;
    }
    return b2 * quad + 1.5 * b4 * quart;
}

/// Ternary search for the maximum of a unimodal function on [lo, hi].
template <class F>
long double ternary_max(F&& f, long double lo, long double hi, int iters = 400) {
    for (int i = 0; i < iters; ++i) {
        const long double m1 = lo + (hi - lo) / 3.0L;
        const long double m2 = hi - (hi - lo) / 3.0L;
        if (f(m1) < f(m2))
            lo = m1;
        else
            hi = m2;
    }
    return 0.5L * (lo + hi);
}

inline CVector random_cvector(Eigen::Index n, std::mt19937_64& rng, double sd = std::sqrt(0.5)) {
    std::normal_distribution<double> nd(0.0, sd);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        v(i) = cplx(re, im);
    }
    return v;
}

/// Nelder-Mead minimisation from x0 with initial simplex step `step`.
template <class F>
std::vector<double> nelder_mead(F&& f, std::vector<double> x0, double step, int iters) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    std::vector<double> val(n + 1);
    for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);
    for (int it = 0; it < iters; ++it) {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) c[j] += pts[idx[i]][j] / static_cast<double>(n);
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = c[j] + t * (pts[worst][j] - c[j]);
            return x;
        };
        const auto xr = along(-1.0);
        const double fr = f(xr);
        if (fr < val[best]) {
            const auto xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe;
                val[worst] = fe;
            } else {
                pts[worst] = xr;
                val[worst] = fr;
            }
        } else if (fr < val[second]) {
            pts[worst] = xr;
            val[worst] = fr;
        } else {
            const auto xc = along(0.5);
            const double fc = f(xc);
            if (fc < val[worst]) {
                pts[worst] = xc;
                val[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    std::size_t b = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (val[i] < val[b]) b = i;
    return pts[b];
}

}  // namespace oracle
