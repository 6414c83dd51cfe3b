#pragma once

// Scalar solvers and small numerical building blocks shared by every module.

#include "wptlab/errors.hpp"
#include "wptlab/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wptlab {

struct SolverConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-9;
    int max_iters = 20000;
    int restarts = 8;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw ConfigError("SolverConfig: tolerances must be positive");
        if (max_iters < 1) throw ConfigError("SolverConfig: max_iters must be >= 1");
        if (restarts < 1) throw ConfigError("SolverConfig: restarts must be >= 1");
    }
};

/// Deterministic per-stream generator: independent streams for (seed, stream) pairs,
/// so Monte Carlo trials give identical results under any evaluation order.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Lambert W, principal branch
// ---------------------------------------------------------------------------

/// Principal branch W0 of the Lambert function (w e^w = x, w >= -1).
/// Halley iteration from a branch-point series or log-based initial guess.
inline double lambert_w0(double x, const SolverConfig& cfg = {}) {
    constexpr double branch = -1.0 / kE;
    if (std::isnan(x)) throw DomainError("lambert_w0: NaN argument");
    if (x < branch) {
        if (branch - x > cfg.abs_tol) throw DomainError("lambert_w0: argument below -1/e");
        return -1.0;
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;

    double w;
    const double q = x - branch;
    if (q < 0.3) {
        const double p = std::sqrt(2.0 * kE * q);
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (x < 3.0) {
        w = std::log1p(x);
        w = w * (1.0 - std::log1p(w) / (2.0 + w));
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    if (q == 0.0) return -1.0;

    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        const double dw = f / denom;
        w -= dw;
        if (std::abs(dw) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w)))
            break;
    }
    return std::max(w, -1.0);
}

// ---------------------------------------------------------------------------
// 1-D root finding and maximisation
// ---------------------------------------------------------------------------

template <std::invocable<double> F>
double bisect(F&& f, double lo, double hi, const SolverConfig& cfg = {}) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw BracketError("bisect: f(lo) and f(hi) have the same sign");
    for (int it = 0; it < std::max(cfg.max_iters, 2000); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        const double fm = f(mid);
        if (fm == 0.0 || (std::abs(fm) <= cfg.abs_tol && (hi - lo) <= cfg.rel_tol * std::abs(mid)))
            return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= cfg.rel_tol * std::abs(mid) && std::abs(fm) <= cfg.abs_tol) return mid;
        if (hi - lo <= std::numeric_limits<double>::min()) return mid;
    }
    return 0.5 * (lo + hi);
}

template <typename Real>
struct GoldenResult {
    Real x;
    Real value;
};

/// Golden-section maximisation of a unimodal function on [lo, hi]. `Real` may be
/// long double when the caller needs the argmax below sqrt(double eps).
template <typename Real = double, typename F>
GoldenResult<Real> golden_section_max(F&& f, Real lo, Real hi, Real x_tol, int max_iters = 400) {
    const Real inv_phi = (std::sqrt(Real(5)) - Real(1)) / Real(2);
    Real a = lo, b = hi;
    Real c = b - inv_phi * (b - a);
    Real d = a + inv_phi * (b - a);
    Real fc = f(c), fd = f(d);
    for (int it = 0; it < max_iters && (b - a) > x_tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? GoldenResult<Real>{c, fc} : GoldenResult<Real>{d, fd};
}

// ---------------------------------------------------------------------------
// Projected gradient ascent
// ---------------------------------------------------------------------------

/// {x >= 0, sum(x) <= budget}
struct CappedSimplex {
    static void project(std::span<double> x, double budget) {
        double sum = 0.0;
        for (double& v : x) {
            v = std::max(v, 0.0);
            sum += v;
        }
        if (sum <= budget) return;
        // Euclidean projection onto the simplex sum = budget (sort-based).
        std::vector<double> u(x.begin(), x.end());
        std::sort(u.begin(), u.end(), std::greater<>());
        double cum = 0.0, theta = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            cum += u[i];
            const double t = (cum - budget) / static_cast<double>(i + 1);
            if (u[i] - t > 0.0) theta = t;
        }
        for (double& v : x) v = std::max(v - theta, 0.0);
    }
    static void sample(std::span<double> x, double budget, std::mt19937_64& rng) {
        std::exponential_distribution<double> ex(1.0);
        std::uniform_real_distribution<double> fill(0.5, 1.0);
        double sum = 0.0;
        for (double& v : x) sum += (v = ex(rng));
        const double scale = budget * fill(rng) / sum;
        for (double& v : x) v *= scale;
    }
    static double scale(double budget) { return budget; }
};

/// {||x||^2 <= budget}
struct Ball {
    static void project(std::span<double> x, double budget) {
        double n2 = 0.0;
        for (double v : x) n2 += v * v;
        if (n2 <= budget) return;
        const double s = std::sqrt(budget / n2);
        for (double& v : x) v *= s;
    }
    static void sample(std::span<double> x, double budget, std::mt19937_64& rng) {
        std::normal_distribution<double> nd;
        std::uniform_real_distribution<double> fill(0.5, 1.0);
        double n2 = 0.0;
        for (double& v : x) {
            v = nd(rng);
            n2 += v * v;
        }
        const double s = std::sqrt(budget / n2) * fill(rng);
        for (double& v : x) v *= s;
    }
    static double scale(double budget) { return std::sqrt(budget); }
};

/// {x >= 0, ||x||^2 <= budget}; clipping then radial scaling is the exact projection.
struct NonnegBall {
    static void project(std::span<double> x, double budget) {
        for (double& v : x) v = std::max(v, 0.0);
        Ball::project(x, budget);
    }
    static void sample(std::span<double> x, double budget, std::mt19937_64& rng) {
        Ball::sample(x, budget, rng);
        for (double& v : x) v = std::abs(v);
    }
    static double scale(double budget) { return std::sqrt(budget); }
};

template <typename S>
concept FeasibleSet = requires(std::span<double> x, double b, std::mt19937_64& rng) {
    S::project(x, b);
    S::sample(x, b, rng);
    { S::scale(b) } -> std::convertible_to<double>;
};

/// Objective callback: returns f(x) and writes df/dx into `grad`.
using GradObjective = std::function<double(std::span<const double>, std::span<double>)>;

struct PgResult {
    std::vector<double> x;
    double value = -std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

namespace detail {

inline void check_finite(double f, std::span<const double> g) {
    if (!std::isfinite(f)) throw NonFiniteError("projected_gradient_max: non-finite objective");
    for (double v : g)
        if (!std::isfinite(v)) throw NonFiniteError("projected_gradient_max: non-finite gradient");
}

template <FeasibleSet Set>
PgResult pg_single(const GradObjective& objective, std::vector<double> x, double budget,
                   const SolverConfig& cfg) {
    const std::size_t n = x.size();
    Set::project(x, budget);
    std::vector<double> g(n), gn(n), xn(n), probe(n);
    double f = objective(x, g);
    check_finite(f, g);

    const double scale = Set::scale(budget);
    auto norm = [](std::span<const double> v) {
        double s = 0.0;
        for (double e : v) s += e * e;
        return std::sqrt(s);
    };
    const double g0 = norm(g);
    const double eta = g0 > 0.0 ? scale / g0 : 1.0;  // fixed yardstick for the residual
    double step = eta;

    auto residual_at = [&](std::span<const double> xv, std::span<const double> gv) {
        for (std::size_t i = 0; i < n; ++i) probe[i] = xv[i] + eta * gv[i];
        Set::project(probe, budget);
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r += (probe[i] - xv[i]) * (probe[i] - xv[i]);
        return std::sqrt(r) / scale;
    };

    PgResult out;
    double res = residual_at(x, g);
    int stall = 0;
    int it = 0;
    for (; it < cfg.max_iters && res > cfg.rel_tol; ++it) {
        bool accepted = false;
        double fn = f;
        while (step > eta * 1e-30) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * g[i];
            Set::project(xn, budget);
            double dir = 0.0, moved = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dir += g[i] * (xn[i] - x[i]);
                moved += (xn[i] - x[i]) * (xn[i] - x[i]);
            }
            if (moved == 0.0) break;
            fn = objective(xn, gn);
            check_finite(fn, gn);
            if (fn >= f + 1e-4 * dir) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double gain = fn - f;
        x.swap(xn);
        g.swap(gn);
        f = fn;
        res = residual_at(x, g);
        stall = (gain <= 1e-15 * std::abs(f)) ? stall + 1 : 0;
        if (stall >= 25) break;
        step *= 2.0;
    }
    out.x = std::move(x);
    out.value = f;
    out.residual = res;
    out.iterations = it;
    return out;
}

}  // namespace detail

/// Maximise a smooth objective over a convex feasible set (default: capped simplex
/// {x >= 0, sum x <= budget}) by projected gradient ascent with Armijo backtracking.
/// Runs every supplied initial point plus `cfg.restarts` random starts and returns
/// the best local solution.
template <FeasibleSet Set = CappedSimplex>
PgResult projected_gradient_max(const GradObjective& objective, std::size_t dim, double budget,
                                const SolverConfig& cfg = {},
                                const std::vector<std::vector<double>>& initial_points = {}) {
    cfg.validate();
    if (!(budget > 0.0)) throw DomainError("projected_gradient_max: budget must be positive");
    if (dim == 0) throw DimensionError("projected_gradient_max: zero dimension");

    PgResult best;
    for (const auto& x0 : initial_points) {
        if (x0.size() != dim) throw DimensionError("projected_gradient_max: initial point size");
        auto r = detail::pg_single<Set>(objective, x0, budget, cfg);
        if (r.value > best.value) best = std::move(r);
    }
    auto rng = make_rng(cfg.seed, 0x5eed);
    for (int k = 0; k < cfg.restarts; ++k) {
        std::vector<double> x0(dim);
        Set::sample(x0, budget, rng);
        auto r = detail::pg_single<Set>(objective, std::move(x0), budget, cfg);
        if (r.value > best.value) best = std::move(r);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Periodic time averages
// ---------------------------------------------------------------------------

inline constexpr int kMaxMomentOrder = 6;

/// Time-averaged powers m_i = <y(t)^i>, i = 0..max_order (even orders are the ones
/// the harvester model consumes).
struct Moments {
    std::array<double, kMaxMomentOrder + 1> m{};
    int max_order = 0;
    double operator[](int i) const { return m.at(static_cast<std::size_t>(i)); }
};

inline Moments moments_of_samples(std::span<const double> samples, int max_order) {
    if (max_order < 0 || max_order > kMaxMomentOrder)
        throw OrderError("moments: order must be in [0, 6]");
    Moments out;
    out.max_order = max_order;
    std::array<double, kMaxMomentOrder + 1> acc{};
    for (double y : samples) {
        double p = 1.0;
        for (int i = 0; i <= max_order; ++i) {
            acc[static_cast<std::size_t>(i)] += p;
            p *= y;
        }
    }
    const double n = static_cast<double>(samples.size());
    for (int i = 0; i <= max_order; ++i) out.m[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)] / n;
    return out;
}

/// Uniform-sampling average over one period. When `harmonic_bound` (highest harmonic
/// of 1/period present in the signal) is given, the sample count must exceed
/// max_order * harmonic_bound so that y^i is integrated without aliasing.
template <std::invocable<double> Signal>
Moments time_average(Signal&& signal, double period, std::size_t samples_per_period, int max_order,
                     std::size_t harmonic_bound = 0) {
    if (!(period > 0.0)) throw DomainError("time_average: period must be positive");
    if (samples_per_period == 0) throw SamplingError("time_average: zero samples");
    if (harmonic_bound > 0 &&
        samples_per_period <= static_cast<std::size_t>(max_order) * harmonic_bound)
        throw SamplingError("time_average: " + std::to_string(samples_per_period) +
                            " samples/period is below the aliasing floor " +
                            std::to_string(static_cast<std::size_t>(max_order) * harmonic_bound + 1));
    std::vector<double> y(samples_per_period);
    const double dt = period / static_cast<double>(samples_per_period);
    for (std::size_t k = 0; k < samples_per_period; ++k) y[k] = signal(dt * static_cast<double>(k));
    return moments_of_samples(y, max_order);
}

// ---------------------------------------------------------------------------
// Symmetric unitary matrices
// ---------------------------------------------------------------------------

namespace detail {

/// Extends orthonormal columns to a full unitary basis (Gram-Schmidt against e_1..e_n).
inline CMatrix complete_to_unitary(const CMatrix& basis) {
    const Eigen::Index n = basis.rows();
    CMatrix full(n, n);
    Eigen::Index k = basis.cols();
    full.leftCols(k) = basis;
    for (Eigen::Index e = 0; e < n && k < n; ++e) {
        CVector v = CVector::Zero(n);
        v(e) = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < k; ++j) v -= full.col(j).dot(v) * full.col(j);
        const double nv = v.norm();
        if (nv > 1e-8) full.col(k++) = v / nv;
    }
    return full;
}

}  // namespace detail

/// Returns Theta with Theta = Theta^T, Theta^H Theta = I and b^T Theta a = e^{j phase}.
/// Built as Theta = U U^T where the unitary U maps conj(r) -> conj(a) and r -> e^{j phase} conj(b)
/// for an auxiliary unit vector r with r^T r = a^T (e^{j phase} conj(b)).
inline CMatrix symmetric_unitary_from_pair(const CVector& a, const CVector& b, double phase) {
    if (a.size() != b.size() || a.size() == 0)
        throw DimensionError("symmetric_unitary_from_pair: vector lengths differ");
    const Eigen::Index n = a.size();
    const cplx rot = std::polar(1.0, phase);
    if (std::abs(a.norm() - 1.0) > 1e-9 || std::abs(b.norm() - 1.0) > 1e-9)
        throw DomainError("symmetric_unitary_from_pair: inputs must be unit vectors");
    const CVector c = rot * b.conjugate();  // target of Theta a
    if (n == 1) {
        CMatrix t(1, 1);
        t(0, 0) = c(0) / a(0);
        return t;
    }
    const cplx z = (a.transpose() * c)(0);  // required r^T r
    const double mag = std::min(std::abs(z), 1.0);
    const double half_angle = 0.5 * std::acos(mag);
    const cplx chi = std::polar(1.0, 0.5 * std::arg(z));
    CVector r = CVector::Zero(n);
    r(0) = chi * std::cos(half_angle);
    r(1) = chi * cplx(0.0, std::sin(half_angle));

    // Orthonormalise the source pair (conj r, r) and map the same coefficients onto (conj a, c).
    CMatrix src(n, 2), dst(n, 2);
    src.col(0) = r.conjugate();
    src.col(1) = r;
    dst.col(0) = a.conjugate();
    dst.col(1) = c;
    CMatrix es(n, 2), ed(n, 2);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < 2; ++j) {
        CVector vs = src.col(j), vd = dst.col(j);
        for (Eigen::Index i = 0; i < k; ++i) {
            const cplx coef = es.col(i).dot(vs);
            vs -= coef * es.col(i);
            vd -= coef * ed.col(i);
        }
        const double ns = vs.norm();
        if (ns < 1e-10) continue;
        es.col(k) = vs / ns;
        ed.col(k) = vd / ns;
        ++k;
    }
    const CMatrix us = detail::complete_to_unitary(es.leftCols(k));
    const CMatrix ud = detail::complete_to_unitary(ed.leftCols(k));
    const CMatrix u = ud * us.adjoint();
    CMatrix theta = u * u.transpose();
    // Symmetrise away round-off.
    theta = 0.5 * (theta + theta.transpose()).eval();
    return theta;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature (weight e^{-x^2})
// ---------------------------------------------------------------------------

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub-Welsch nodes/weights for \int e^{-x^2} f(x) dx.
inline QuadratureRule gauss_hermite(int n) {
    if (n < 1) throw DomainError("gauss_hermite: need at least one node");
    RMatrix j = RMatrix::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double off = std::sqrt(static_cast<double>(i) / 2.0);
        j(i, i - 1) = off;
        j(i - 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(j);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double mu0 = std::sqrt(kPi);
    for (int i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace wptlab
