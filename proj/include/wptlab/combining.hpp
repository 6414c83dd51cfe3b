#pragma once

// Multi-antenna harvesters: DC combining of per-branch rectifiers and RF combining
// through phase shifters ahead of a single rectifier.

#include "wptlab/beamforming.hpp"
#include "wptlab/channel.hpp"
#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/rectenna.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <vector>

namespace wptlab {

struct RfCombiner {
    CVector w_r;
    bool constrained = true;
    std::vector<double> theta;  // phases when constrained
};

struct DcCombiningResult {
    CVector w_t;
    HarvestReport report;
};

struct RfCombiningResult {
    CVector w_t;
    RfCombiner combiner;
    HarvestReport report;
    std::vector<double> objective_trace;  // |w_R^H H w_T|^2 per half-step
};

namespace detail {

inline const CMatrix& single_tone(const ChannelResponse& ch, const char* who) {
    ch.validate();
    if (ch.tones() != 1) throw ShapeError(std::string(who) + ": requires N = 1");
    return ch.h.front();
}

/// Branch voltage for complex received amplitude c on a single tone.
inline double branch_vout(const EhTaylorModel& model, double amp2) {
    Moments m;
    m.max_order = 6;
    m.m[2] = amp2;
    m.m[4] = 1.5 * amp2 * amp2;
    m.m[6] = 2.5 * amp2 * amp2 * amp2;
    return model.vout_from_moments(m);
}

/// d v / d |c|^2 for the single-tone branch voltage.
inline double branch_vout_slope(const EhTaylorModel& model, double amp2) {
    return model.beta(2) + 3.0 * model.beta(4) * amp2 + 7.5 * model.beta(6) * amp2 * amp2;
}

}  // namespace detail

/// Sum of per-branch DC powers, each rectifier seeing amplitude |h_q w_T|. In terms of
/// the sinusoid peak a = sqrt(2)|h_q w_T| the branch voltage is sum_i beta_i zeta_i a^i.
inline HarvestReport dc_combine_harvest(const EhTaylorModel& model, const ChannelResponse& ch, const CVector& w_t) {
    model.validate();
    const CMatrix& h = detail::single_tone(ch, "dc_combine_harvest");
    if (w_t.size() != h.cols()) throw DimensionError("dc_combine_harvest: beamformer length differs from M");
    const CVector c = h * w_t;
    double p_dc = 0.0, p_rf = 0.0;
    for (Eigen::Index q = 0; q < c.size(); ++q) {
        const double v = detail::branch_vout(model, std::norm(c(q)));
        p_dc += v * v / model.r_load;
        p_rf += std::norm(c(q));
    }
    HarvestReport r = HarvestReport::from(p_rf, std::sqrt(p_dc * model.r_load), model.r_load);
    return r;
}

/// Maximises the DC-combined power over ||w_T||^2 <= P by projected gradient on the
/// real/imaginary parts, started from MRT on every row, the dominant right singular
/// vector and random directions.
inline DcCombiningResult optimize_dc_combining(const EhTaylorModel& model, const ChannelResponse& ch, double power,
                                               const SolverConfig& cfg = {}) {
    model.validate();
    const CMatrix& h = detail::single_tone(ch, "optimize_dc_combining");
    if (!(power > 0.0)) throw DomainError("optimize_dc_combining: power must be > 0");
    const Eigen::Index M = h.cols();
    const Eigen::Index Q = h.rows();
    if (h.norm() == 0.0) throw ZeroChannelError("optimize_dc_combining: zero channel");

    auto pack = [M](const CVector& w) {
        std::vector<double> v(static_cast<std::size_t>(2 * M));
        for (Eigen::Index i = 0; i < M; ++i) {
            v[static_cast<std::size_t>(i)] = w(i).real();
            v[static_cast<std::size_t>(M + i)] = w(i).imag();
        }
        return v;
    };
    auto unpack = [M](std::span<const double> v) {
        CVector w(M);
        for (Eigen::Index i = 0; i < M; ++i) w(i) = cplx(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(M + i)]);
        return w;
    };

    std::vector<std::vector<double>> starts;
    for (Eigen::Index q = 0; q < Q; ++q) {
        const double nq = h.row(q).norm();
        if (nq > 0.0) starts.push_back(pack(std::sqrt(power) * h.row(q).adjoint() / nq));
    }
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullV);
    starts.push_back(pack(std::sqrt(power) * svd.matrixV().col(0)));

    double ref = 0.0;
    for (const auto& s : starts) ref = std::max(ref, dc_combine_harvest(model, ch, unpack(s)).p_dc);
    const double scale = ref > 0.0 ? 1.0 / ref : 1.0;

    GradObjective obj = [&](std::span<const double> v, std::span<double> g) {
        const CVector w = unpack(v);
        const CVector c = h * w;
        CVector gw = CVector::Zero(M);
        double f = 0.0;
        for (Eigen::Index q = 0; q < Q; ++q) {
            const double a2 = std::norm(c(q));
            const double vq = detail::branch_vout(model, a2);
            f += vq * vq / model.r_load;
            // d(v^2/R)/d conj(w) = (2 v / R) v'(|c|^2) c h_q^H ; real gradient is twice that
            gw += (2.0 * 2.0 * vq / model.r_load * detail::branch_vout_slope(model, a2) * c(q)) * h.row(q).adjoint();
        }
        for (Eigen::Index i = 0; i < M; ++i) {
            g[static_cast<std::size_t>(i)] = gw(i).real() * scale;
            g[static_cast<std::size_t>(M + i)] = gw(i).imag() * scale;
        }
        return f * scale;
    };
    const PgResult r = projected_gradient_max<Ball>(obj, static_cast<std::size_t>(2 * M), power, cfg, starts);
    DcCombiningResult out;
    out.w_t = unpack(r.x);
    out.report = dc_combine_harvest(model, ch, out.w_t);
    return out;
}

/// Phase-shifter RF combiner: w_R,q = e^{j theta_q}/sqrt(Q). Alternates MRT on the
/// combined row w_R^H H with theta_q = arg((H w_T)_q); restarts from random phases
/// and from the row-MRT solutions keep the best stationary point.
inline RfCombiningResult optimize_rf_combining(const EhTaylorModel& model, const ChannelResponse& ch, double power,
                                               const SolverConfig& cfg = {}) {
    model.validate();
    const CMatrix& h = detail::single_tone(ch, "optimize_rf_combining");
    if (!(power > 0.0)) throw DomainError("optimize_rf_combining: power must be > 0");
    const Eigen::Index Q = h.rows();
    const double inv_sqrt_q = 1.0 / std::sqrt(static_cast<double>(Q));
    if (h.norm() == 0.0) throw ZeroChannelError("optimize_rf_combining: zero channel");

    auto combiner_from = [&](const std::vector<double>& th) {
        CVector w(Q);
        for (Eigen::Index q = 0; q < Q; ++q) w(q) = std::polar(inv_sqrt_q, th[static_cast<std::size_t>(q)]);
        return w;
    };

    auto run = [&](std::vector<double> theta) {
        RfCombiningResult res;
        double prev = -1.0;
        CVector w_t;
        for (int it = 0; it < cfg.max_iters; ++it) {
            const CVector w_r = combiner_from(theta);
            const Eigen::RowVectorXcd row = w_r.adjoint() * h;
            const double nr = row.norm();
            if (nr == 0.0) {
                // Combined row vanished: nudge the first phase.
                theta[0] += 0.5;
                continue;
            }
            w_t = std::sqrt(power) * row.adjoint() / nr;
            res.objective_trace.push_back(power * nr * nr);
            const CVector hw = h * w_t;
            for (Eigen::Index q = 0; q < Q; ++q) theta[static_cast<std::size_t>(q)] = std::arg(hw(q));
            const double obj = std::pow(hw.cwiseAbs().sum() * inv_sqrt_q, 2);
            res.objective_trace.push_back(obj);
            if (obj - prev <= cfg.rel_tol * obj) break;
            prev = obj;
        }
        // Finish on a transmit update so w_T is MRT for the final combiner.
        const CVector w_r = combiner_from(theta);
        const Eigen::RowVectorXcd row = w_r.adjoint() * h;
        w_t = std::sqrt(power) * row.adjoint() / row.norm();
        res.w_t = w_t;
        res.combiner.w_r = w_r;
        res.combiner.constrained = true;
        res.combiner.theta = theta;
        return res;
    };

    std::vector<std::vector<double>> inits;
    for (Eigen::Index q = 0; q < Q; ++q) {
        const double nq = h.row(q).norm();
        if (nq == 0.0) continue;
        const CVector hw = h * (h.row(q).adjoint() / nq);
        std::vector<double> th(static_cast<std::size_t>(Q));
        for (Eigen::Index k = 0; k < Q; ++k) th[static_cast<std::size_t>(k)] = std::arg(hw(k));
        inits.push_back(th);
    }
    {
        Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullU);
        std::vector<double> th(static_cast<std::size_t>(Q));
        for (Eigen::Index k = 0; k < Q; ++k) th[static_cast<std::size_t>(k)] = std::arg(svd.matrixU()(k, 0));
        inits.push_back(th);
    }
    auto rng = make_rng(cfg.seed, 0xcb);
    std::uniform_real_distribution<double> ud(0.0, kTwoPi);
    for (int r = 0; r < cfg.restarts; ++r) {
        std::vector<double> th(static_cast<std::size_t>(Q));
        for (auto& t : th) t = ud(rng);
        inits.push_back(th);
    }

    RfCombiningResult best;
    double best_obj = -1.0;
    for (const auto& th : inits) {
        RfCombiningResult res = run(th);
        const double obj = std::norm((res.combiner.w_r.adjoint() * h * res.w_t)(0));
        if (obj > best_obj) {
            best_obj = obj;
            best = std::move(res);
        }
    }
    const cplx c = (best.combiner.w_r.adjoint() * h * best.w_t)(0);
    CVector cc(1);
    cc(0) = c;
    best.report = harvest(model, ReceivedSignal::multisine(cc));
    return best;
}

/// Unconstrained RF combining (any ||w_R|| <= 1): dominant singular pair, received
/// power sigma_max^2 P. Reported as an upper bound for the phase-shifter design.
inline RfCombiningResult unconstrained_rf_combining(const EhTaylorModel& model, const ChannelResponse& ch, double power) {
    model.validate();
    const CMatrix& h = detail::single_tone(ch, "unconstrained_rf_combining");
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RfCombiningResult r;
    r.w_t = std::sqrt(power) * svd.matrixV().col(0);
    r.combiner.w_r = svd.matrixU().col(0);
    r.combiner.constrained = false;
    CVector cc(1);
    cc(0) = svd.singularValues()(0) * std::sqrt(power);
    r.report = harvest(model, ReceivedSignal::multisine(cc));
    return r;
}

}  // namespace wptlab
