#pragma once

// Multisine waveform design: phase alignment, power allocation heuristics, the
// amplitude optimiser for the fourth-order harvester model and multi-user
// energy-region solvers.

#include "wptlab/channel.hpp"
#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/rectenna.hpp"
#include "wptlab/signal.hpp"
#include "wptlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace wptlab {

namespace detail {

inline void require_siso(const ChannelResponse& ch, const char* who) {
    ch.validate();
    if (ch.rx() != 1 || ch.tx() != 1) throw ShapeError(std::string(who) + ": requires M = Q = 1");
}

inline void require_miso(const ChannelResponse& ch, const char* who) {
    ch.validate();
    if (ch.rx() != 1) throw ShapeError(std::string(who) + ": requires Q = 1");
}

/// Per-tone channel norms ||h_n|| (Q = 1).
inline RVector tone_gains(const ChannelResponse& ch) {
    RVector a(ch.tones());
    for (int n = 0; n < ch.tones(); ++n) a(n) = ch.h[static_cast<std::size_t>(n)].row(0).norm();
    return a;
}

/// x_{., n} = s_n h_n^H / ||h_n|| (matched filter per tone; zero where h_n = 0).
inline CMatrix matched_weights(const ChannelResponse& ch, const RVector& s) {
    CMatrix x = CMatrix::Zero(ch.tx(), ch.tones());
    for (int n = 0; n < ch.tones(); ++n) {
        const Eigen::RowVectorXcd h = ch.h[static_cast<std::size_t>(n)].row(0);
        const double nh = h.norm();
        if (nh > 0.0) x.col(n) = s(n) * h.adjoint() / nh;
    }
    return x;
}

/// v(s) for aligned tones, u = s .* A:  beta2 sum u^2 + 1.5 beta4 sum_k C_k^2 with
/// C_k = sum_{a+b=k} u_a u_b. Gradient d v / d s_j = A_j (2 beta2 u_j + 6 beta4 sum_k C_k u_{k-j}).
inline double aligned_vout(const EhTaylorModel& model, const RVector& amp, std::span<const double> s,
                           std::span<double> grad) {
    const Eigen::Index n = amp.size();
    const double b2 = model.beta(2);
    const double b4 = model.beta(4);
    std::vector<double> u(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j)] * amp(j);
    std::vector<double> conv(static_cast<std::size_t>(2 * n - 1), 0.0);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) conv[static_cast<std::size_t>(a + b)] += u[static_cast<std::size_t>(a)] * u[static_cast<std::size_t>(b)];
    double quad = 0.0, quart = 0.0;
    for (double v : u) quad += v * v;
    for (double v : conv) quart += v * v;
    if (!grad.empty()) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double acc = 0.0;
            for (Eigen::Index m = 0; m < n; ++m) acc += conv[static_cast<std::size_t>(j + m)] * u[static_cast<std::size_t>(m)];
            grad[static_cast<std::size_t>(j)] = amp(j) * (2.0 * b2 * u[static_cast<std::size_t>(j)] + 6.0 * b4 * acc);
        }
    }
    return b2 * quad + 1.5 * b4 * quart;
}

inline Eigen::Index argmax_lowest(const RVector& a) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < a.size(); ++i)
        if (a(i) > a(best)) best = i;
    return best;
}

/// s_n^2 proportional to A_n^{2 beta}; beta = +inf puts everything on the strongest tone.
inline RVector smf_amplitudes(const RVector& amp, double beta_exp, double power) {
    if (!(beta_exp >= 0.0)) throw DomainError("smf_allocation: beta must be >= 0");
    const double amax = amp.maxCoeff();
    if (!(amax > 0.0)) throw DegenerateChannelError("smf_allocation: all tone gains are zero");
    RVector w(amp.size());
    if (std::isinf(beta_exp)) {
        w.setZero();
        w(argmax_lowest(amp)) = 1.0;
    } else {
        for (Eigen::Index i = 0; i < amp.size(); ++i) w(i) = std::pow(amp(i) / amax, 2.0 * beta_exp);
    }
    return (w * (power / w.sum())).cwiseSqrt();
}

}  // namespace detail

/// phi_n = -arg(h_n): every received tone arrives with zero phase.
inline std::vector<double> optimal_phases(const ChannelResponse& ch) {
    detail::require_siso(ch, "optimal_phases");
    std::vector<double> phi;
    for (const auto& h : ch.h) phi.push_back(-std::arg(h(0, 0)));
    return phi;
}

/// Scaled matched filter allocation with optimal phases.
inline SignalSpec smf_allocation(const ChannelResponse& ch, double beta_exp, double power) {
    detail::require_miso(ch, "smf_allocation");
    if (!(power > 0.0)) throw DomainError("smf_allocation: power must be > 0");
    const RVector s = detail::smf_amplitudes(detail::tone_gains(ch), beta_exp, power);
    return SignalSpec::deterministic(detail::matched_weights(ch, s), power);
}

inline SignalSpec uniform_allocation(const ChannelResponse& ch, double power) { return smf_allocation(ch, 0.0, power); }

inline SignalSpec single_tone_allocation(const ChannelResponse& ch, double power) {
    return smf_allocation(ch, std::numeric_limits<double>::infinity(), power);
}

/// v_out of a deterministic signal at the (single) receive antenna.
inline double vout_of(const EhTaylorModel& model, const SignalSpec& sig, const ChannelResponse& ch) {
    const CVector ones = CVector::Ones(sig.tones());
    return harvest(model, ReceivedSignal::multisine(received_spectrum(sig, ch, ones))).v_out;
}

/// Maximises the aligned-tone v_out over amplitudes s >= 0, ||s||^2 <= P.
inline RVector optimize_amplitudes(const RVector& amp, const EhTaylorModel& model, double power,
                                   const SolverConfig& cfg = {}) {
    model.validate();
    if (!(power > 0.0)) throw DomainError("optimize_allocation: power must be > 0");
    const Eigen::Index n = amp.size();
    if (!(amp.maxCoeff() > 0.0)) throw DegenerateChannelError("optimize_allocation: all tone gains are zero");
    if (model.n_o == 2 || n == 1) return detail::smf_amplitudes(amp, std::numeric_limits<double>::infinity(), power);
    if (model.n_o != 4) throw UnsupportedError("optimize_allocation: requires n_o = 4");

    std::vector<std::vector<double>> starts;
    for (double b : {0.0, 1.0, 3.0, std::numeric_limits<double>::infinity()}) {
        const RVector s = detail::smf_amplitudes(amp, b, power);
        starts.emplace_back(s.data(), s.data() + n);
    }
    const double ref = detail::aligned_vout(model, amp, starts.front(), {});
    const double scale = ref > 0.0 ? 1.0 / ref : 1.0;
    GradObjective obj = [&](std::span<const double> s, std::span<double> g) {
        const double v = detail::aligned_vout(model, amp, s, g);
        for (double& e : g) e *= scale;
        return v * scale;
    };
    const PgResult r = projected_gradient_max<NonnegBall>(obj, static_cast<std::size_t>(n), power, cfg, starts);
    RVector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = r.x[static_cast<std::size_t>(i)];
    return s;
}

/// Adaptive allocation for a SISO (or MISO with per-tone matched filtering) channel.
inline SignalSpec optimize_allocation(const ChannelResponse& ch, const EhTaylorModel& model, double power,
                                      const SolverConfig& cfg = {}) {
    detail::require_miso(ch, "optimize_allocation");
    const RVector s = optimize_amplitudes(detail::tone_gains(ch), model, power, cfg);
    return SignalSpec::deterministic(detail::matched_weights(ch, s), power);
}

// ---------------------------------------------------------------------------
// Multi-user energy region
// ---------------------------------------------------------------------------

struct EnergyRegionPoint {
    std::vector<double> p_dc;     // per user (W)
    std::vector<double> weights;  // v_k

    double weighted_sum() const {
        double s = 0.0;
        for (std::size_t k = 0; k < p_dc.size(); ++k) s += weights[k] * p_dc[k];
        return s;
    }
    double min_energy() const { return *std::min_element(p_dc.begin(), p_dc.end()); }
};

struct MultiUserResult {
    SignalSpec signal;
    EnergyRegionPoint point;
};

namespace detail {

inline void check_users(const std::vector<ChannelResponse>& users, const EhTaylorModel& model, const char* who) {
    if (users.empty()) throw DimensionError(std::string(who) + ": need at least one user");
    for (const auto& u : users) {
        require_miso(u, who);
        if (u.tx() != users.front().tx() || u.tones() != users.front().tones())
            throw DimensionError(std::string(who) + ": users must share M and N");
    }
    model.validate();
    if (model.n_o > 4) throw UnsupportedError(std::string(who) + ": multi-user solvers support n_o in {2, 4}");
}

/// Packs x (M x N complex) as [Re..., Im...] in column-major order.
inline std::vector<double> pack(const CMatrix& x) {
    const Eigen::Index k = x.size();
    std::vector<double> v(static_cast<std::size_t>(2 * k));
    for (Eigen::Index i = 0; i < k; ++i) {
        v[static_cast<std::size_t>(i)] = x.data()[i].real();
        v[static_cast<std::size_t>(k + i)] = x.data()[i].imag();
    }
    return v;
}

inline CMatrix unpack(std::span<const double> v, Eigen::Index M, Eigen::Index N) {
    CMatrix x(M, N);
    const Eigen::Index k = M * N;
    for (Eigen::Index i = 0; i < k; ++i)
        x.data()[i] = cplx(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(k + i)]);
    return x;
}

/// User P_dc and its gradient with respect to x (as dP/dRe + j dP/dIm).
inline double user_pdc(const EhTaylorModel& model, const ChannelResponse& ch, const CMatrix& x, CMatrix* grad) {
    const Eigen::Index N = x.cols();
    CVector c(N);
    for (Eigen::Index n = 0; n < N; ++n) c(n) = (ch.h[static_cast<std::size_t>(n)].row(0) * x.col(n))(0);
    const double b2 = model.beta(2);
    const double b4 = model.beta(4);
    std::vector<cplx> d(static_cast<std::size_t>(2 * N - 1), cplx(0.0));
    for (Eigen::Index a = 0; a < N; ++a)
        for (Eigen::Index b = 0; b < N; ++b) d[static_cast<std::size_t>(a + b)] += c(a) * c(b);
    double quart = 0.0;
    for (const cplx& e : d) quart += std::norm(e);
    const double v = b2 * c.squaredNorm() + 1.5 * b4 * quart;
    if (grad) {
        grad->resize(x.rows(), N);
        for (Eigen::Index j = 0; j < N; ++j) {
            // dv/d conj(c_j) = beta2 c_j + 3 beta4 sum_m D_{j+m} conj(c_m)
            cplx acc = 0.0;
            for (Eigen::Index m = 0; m < N; ++m) acc += d[static_cast<std::size_t>(j + m)] * std::conj(c(m));
            const cplx dv = b2 * c(j) + 3.0 * b4 * acc;
            const cplx dp = (2.0 * v / model.r_load) * dv;
            grad->col(j) = 2.0 * ch.h[static_cast<std::size_t>(j)].row(0).adjoint() * dp;
        }
    }
    return v * v / model.r_load;
}

inline EnergyRegionPoint evaluate_point(const EhTaylorModel& model, const std::vector<ChannelResponse>& users,
                                        const CMatrix& x, const std::vector<double>& weights) {
    EnergyRegionPoint p;
    p.weights = weights;
    for (const auto& u : users) p.p_dc.push_back(user_pdc(model, u, x, nullptr));
    return p;
}

/// Single-user optima used as initial points and TDMA slots.
inline std::vector<CMatrix> single_user_optima(const std::vector<ChannelResponse>& users, const EhTaylorModel& model,
                                               double power, const SolverConfig& cfg) {
    std::vector<CMatrix> out;
    for (const auto& u : users) {
        const RVector s = optimize_amplitudes(tone_gains(u), model, power, cfg);
        out.push_back(matched_weights(u, s));
    }
    return out;
}

/// Projected gradient over the complex ball, objective f(P_dc,1..K) with gradient
/// weights df/dP_k supplied by `combine`.
template <class Combine>
PgResult optimize_users(const std::vector<ChannelResponse>& users, const EhTaylorModel& model, double power,
                        const SolverConfig& cfg, const std::vector<std::vector<double>>& starts, Combine&& combine,
                        double scale) {
    const Eigen::Index M = users.front().tx();
    const Eigen::Index N = users.front().tones();
    const std::size_t K = users.size();
    GradObjective obj = [&, M, N, K](std::span<const double> v, std::span<double> g) {
        const CMatrix x = unpack(v, M, N);
        std::vector<double> p(K);
        std::vector<CMatrix> gk(K);
        for (std::size_t k = 0; k < K; ++k) p[k] = user_pdc(model, users[k], x, &gk[k]);
        std::vector<double> w(K);
        const double f = combine(p, w);
        CMatrix gx = CMatrix::Zero(M, N);
        for (std::size_t k = 0; k < K; ++k) gx += w[k] * gk[k];
        const Eigen::Index sz = M * N;
        for (Eigen::Index i = 0; i < sz; ++i) {
            g[static_cast<std::size_t>(i)] = gx.data()[i].real() * scale;
            g[static_cast<std::size_t>(sz + i)] = gx.data()[i].imag() * scale;
        }
        return f * scale;
    };
    return projected_gradient_max<Ball>(obj, static_cast<std::size_t>(2 * M * N), power, cfg, starts);
}

}  // namespace detail

/// Per-user P_dc of a deterministic multi-antenna signal.
inline EnergyRegionPoint evaluate_energy_point(const EhTaylorModel& model, const std::vector<ChannelResponse>& users,
                                               const SignalSpec& sig, const std::vector<double>& weights = {}) {
    std::vector<double> w = weights.empty() ? std::vector<double>(users.size(), 1.0) : weights;
    return detail::evaluate_point(model, users, sig.weights, w);
}

/// Maximises sum_k v_k P_dc,k over deterministic x_{m,n} with sum |x|^2 <= P.
inline MultiUserResult weighted_sum_energy(const std::vector<ChannelResponse>& users, const EhTaylorModel& model,
                                           const std::vector<double>& weights, double power,
                                           const SolverConfig& cfg = {},
                                           const std::vector<CMatrix>& extra_starts = {}) {
    detail::check_users(users, model, "weighted_sum_energy");
    if (weights.size() != users.size()) throw DimensionError("weighted_sum_energy: one weight per user");
    for (double w : weights)
        if (!(w >= 0.0)) throw DomainError("weighted_sum_energy: weights must be >= 0");
    if (!(power > 0.0)) throw DomainError("weighted_sum_energy: power must be > 0");
    const Eigen::Index M = users.front().tx();
    const Eigen::Index N = users.front().tones();

    std::vector<std::vector<double>> starts;
    for (const auto& x : detail::single_user_optima(users, model, power, cfg)) starts.push_back(detail::pack(x));
    for (const auto& x : extra_starts) starts.push_back(detail::pack(x));
    double ref = 0.0;
    for (const auto& s : starts) {
        const auto p = detail::evaluate_point(model, users, detail::unpack(s, M, N), weights);
        ref = std::max(ref, p.weighted_sum());
    }
    const double scale = ref > 0.0 ? 1.0 / ref : 1.0;
    auto combine = [&](const std::vector<double>& p, std::vector<double>& w) {
        double f = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            f += weights[k] * p[k];
            w[k] = weights[k];
        }
        return f;
    };
    const PgResult r = detail::optimize_users(users, model, power, cfg, starts, combine, scale);
    MultiUserResult out;
    out.signal = SignalSpec::deterministic(detail::unpack(r.x, M, N), power);
    out.point = detail::evaluate_point(model, users, out.signal.weights, weights);
    return out;
}

/// Maximises min_k P_dc,k with a log-sum-exp smoothed minimum whose temperature is
/// annealed towards zero; the final answer is the candidate with the best true minimum.
inline MultiUserResult max_min_energy(const std::vector<ChannelResponse>& users, const EhTaylorModel& model,
                                      double power, const SolverConfig& cfg = {}) {
    detail::check_users(users, model, "max_min_energy");
    const std::size_t K = users.size();
    const Eigen::Index M = users.front().tx();
    const Eigen::Index N = users.front().tones();
    const std::vector<double> ones(K, 1.0);

    std::vector<CMatrix> candidates = detail::single_user_optima(users, model, power, cfg);
    const MultiUserResult ws = weighted_sum_energy(users, model, ones, power, cfg);
    candidates.push_back(ws.signal.weights);
    if (K == 1) return ws;

    auto true_min = [&](const CMatrix& x) { return detail::evaluate_point(model, users, x, ones).min_energy(); };
    CMatrix best = candidates.front();
    for (const auto& x : candidates)
        if (true_min(x) > true_min(best)) best = x;

    double ref = 0.0;
    for (double p : detail::evaluate_point(model, users, ws.signal.weights, ones).p_dc) ref += p;
    ref /= static_cast<double>(K);
    if (!(ref > 0.0)) ref = 1.0;

    std::vector<std::vector<double>> starts;
    for (const auto& x : candidates) starts.push_back(detail::pack(x));
    SolverConfig local = cfg;
    for (double temp : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
        auto combine = [&, temp](const std::vector<double>& p, std::vector<double>& w) {
            // -T log sum exp(-q_k / T) with q = p / ref
            double qmin = std::numeric_limits<double>::infinity();
            for (double v : p) qmin = std::min(qmin, v / ref);
            double z = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k) z += std::exp(-(p[k] / ref - qmin) / temp);
            for (std::size_t k = 0; k < p.size(); ++k) w[k] = std::exp(-(p[k] / ref - qmin) / temp) / z / ref;
            return qmin - temp * std::log(z);
        };
        const PgResult r = detail::optimize_users(users, model, power, local, starts, combine, 1.0);
        const CMatrix x = detail::unpack(r.x, M, N);
        if (true_min(x) > true_min(best)) best = x;
        starts.assign(1, r.x);
        starts.push_back(detail::pack(best));
        local.restarts = 1;
    }
    MultiUserResult out;
    out.signal = SignalSpec::deterministic(best, power);
    out.point = detail::evaluate_point(model, users, best, ones);
    return out;
}

/// TDMA baseline: user k's single-user optimum is transmitted for a fraction tau_k of
/// the time; every user harvests in every slot.
struct TdmaBaseline {
    std::vector<CMatrix> slots;
    RMatrix p_dc;  // p_dc(j, k): user j's power while slot k is active

    /// Best weighted sum over the time-sharing simplex (attained at a vertex).
    double weighted_sum(const std::vector<double>& weights) const {
        double best = 0.0;
        for (Eigen::Index k = 0; k < p_dc.cols(); ++k) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < p_dc.rows(); ++j) s += weights[static_cast<std::size_t>(j)] * p_dc(j, k);
            best = std::max(best, s);
        }
        return best;
    }

    /// Best minimum energy over time fractions. Exact for K <= 2; for more users only
    /// pairwise mixtures are scanned, which gives a lower bound.
    double max_min() const {
        const Eigen::Index K = p_dc.cols();
        double best = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) best = std::max(best, p_dc.col(k).minCoeff());
        for (Eigen::Index a = 0; a < K; ++a)
            for (Eigen::Index b = a + 1; b < K; ++b) {
                // mix two slots: min_j [t P(j,a) + (1-t) P(j,b)] is concave piecewise linear in t
                std::vector<double> ts{0.0, 1.0};
                for (Eigen::Index i = 0; i < p_dc.rows(); ++i)
                    for (Eigen::Index j = i + 1; j < p_dc.rows(); ++j) {
                        const double den = (p_dc(i, a) - p_dc(i, b)) - (p_dc(j, a) - p_dc(j, b));
                        if (std::abs(den) > 0.0) {
                            const double t = (p_dc(j, b) - p_dc(i, b)) / den;
                            if (t > 0.0 && t < 1.0) ts.push_back(t);
                        }
                    }
                for (double t : ts) best = std::max(best, (t * p_dc.col(a) + (1.0 - t) * p_dc.col(b)).minCoeff());
            }
        return best;
    }
};

inline TdmaBaseline tdma_baseline(const std::vector<ChannelResponse>& users, const EhTaylorModel& model, double power,
                                  const SolverConfig& cfg = {}) {
    detail::check_users(users, model, "tdma_baseline");
    TdmaBaseline t;
    t.slots = detail::single_user_optima(users, model, power, cfg);
    const auto K = static_cast<Eigen::Index>(users.size());
    t.p_dc.resize(K, K);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < K; ++j)
            t.p_dc(j, k) = detail::user_pdc(model, users[static_cast<std::size_t>(j)], t.slots[static_cast<std::size_t>(k)], nullptr);
    return t;
}

}  // namespace wptlab
