#pragma once

// Rate-energy tradeoff: mutual information of the supported input families on the
// AWGN channel, harvested power per distribution, receiver sweeps and the
// multi-carrier Gaussian frontier.

#include "wptlab/channel.hpp"
#include "wptlab/errors.hpp"
#include "wptlab/irs.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/rectenna.hpp"
#include "wptlab/signal.hpp"
#include "wptlab/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace wptlab {

enum class Receiver { Ideal, TimeSwitching, PowerSplitting };

inline const char* receiver_name(Receiver r) {
    switch (r) {
        case Receiver::Ideal: return "ideal";
        case Receiver::TimeSwitching: return "ts";
        case Receiver::PowerSplitting: return "ps";
    }
    return "?";
}

struct RePoint {
    double rate = 0.0;    // bits per channel use
    double energy = 0.0;  // harvested DC power (W)
    Receiver receiver = Receiver::Ideal;
    double param = 0.0;   // sweep parameter (P_r, l, p_ts, tau, rho or energy target)
    double param2 = 0.0;  // second parameter where used (mixture l)
};

// ---------------------------------------------------------------------------
// Mutual information
// ---------------------------------------------------------------------------

namespace detail {

/// log I0(z) for z >= 0.
inline double log_bessel_i0(double z) {
    if (z < 600.0) return std::log(std::cyl_bessel_i(0.0, z));
    const double iz = 1.0 / z;
    return z - 0.5 * std::log(kTwoPi * z) + std::log1p(iz / 8.0 + 9.0 * iz * iz / 128.0);
}

inline double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double e : v) mx = std::max(mx, e);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double e : v) s += std::exp(e - mx);
    return mx + std::log(s);
}

/// Received-point mixture: rings (radius r_k >= 0, weight w_k, uniform phase) or
/// fixed points (complex location, weight). Natural-log density of y.
struct OutputMixture {
    std::vector<double> ring_radius;
    std::vector<double> ring_weight;
    std::vector<cplx> point;
    std::vector<double> point_weight;
    double noise = 1.0;

    double log_density(cplx y) const {
        std::vector<double> terms;
        const double a = std::abs(y);
        const double base = -std::log(kPi * noise);
        for (std::size_t k = 0; k < ring_radius.size(); ++k) {
            if (ring_weight[k] <= 0.0) continue;
            const double r = ring_radius[k];
            terms.push_back(std::log(ring_weight[k]) + base - (a * a + r * r) / noise + log_bessel_i0(2.0 * r * a / noise));
        }
        for (std::size_t k = 0; k < point.size(); ++k) {
            if (point_weight[k] <= 0.0) continue;
            terms.push_back(std::log(point_weight[k]) + base - std::norm(y - point[k]) / noise);
        }
        return log_sum_exp(terms);
    }
};

/// h(Y) in bits by 2-D Gauss-Hermite quadrature over the noise around each input
/// component. Circular symmetry lets each ring be evaluated at one phase.
inline double output_entropy_bits(const OutputMixture& mix, int nodes) {
    const QuadratureRule gh = gauss_hermite(nodes);
    const double sigma = std::sqrt(mix.noise);
    auto expect = [&](cplx centre) {
        double s = 0.0;
        for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < nodes; ++j) {
                const cplx n(sigma * gh.nodes[static_cast<std::size_t>(i)], sigma * gh.nodes[static_cast<std::size_t>(j)]);
                s += gh.weights[static_cast<std::size_t>(i)] * gh.weights[static_cast<std::size_t>(j)] * mix.log_density(centre + n);
            }
        return s / kPi;
    };
    double h = 0.0;
    for (std::size_t k = 0; k < mix.ring_radius.size(); ++k)
        if (mix.ring_weight[k] > 0.0) h -= mix.ring_weight[k] * expect(cplx(mix.ring_radius[k], 0.0));
    for (std::size_t k = 0; k < mix.point.size(); ++k)
        if (mix.point_weight[k] > 0.0) h -= mix.point_weight[k] * expect(mix.point[k]);
    return h / kLn2;
}

inline double discrete_mi(const OutputMixture& mix) {
    constexpr int kNodes = 48;
    constexpr int kCheckNodes = 64;
    const double noise_entropy = std::log2(kPi * kE * mix.noise);
    const double a = output_entropy_bits(mix, kNodes) - noise_entropy;
    const double b = output_entropy_bits(mix, kCheckNodes) - noise_entropy;
    if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a - b) > 1e-4 * std::max(1.0, std::abs(b)))
        throw QuadratureError("mutual_information: quadrature did not converge (" + std::to_string(a) + " vs " +
                              std::to_string(b) + ")");
    return std::max(b, 0.0);
}

inline double on_off_mi(double l, double power, double gain2, double noise) {
    OutputMixture mix;
    mix.noise = noise;
    const double p_on = 1.0 / (l * l);
    mix.ring_radius = {0.0, l * std::sqrt(power * gain2)};
    mix.ring_weight = {1.0 - p_on, p_on};
    return discrete_mi(mix);
}

}  // namespace detail

/// I(X; hX + N) in bits, N ~ CN(0, noise).
inline double mutual_information(const InputDistribution& d, cplx h, double noise) {
    if (!(noise > 0.0)) throw DomainError("mutual_information: noise variance must be > 0");
    validate(d);
    const double g = std::norm(h) / noise;
    return std::visit(
        detail::overloaded{
            [&](const dist::Cw&) { return 0.0; },
            [&](const dist::Cscg& c) { return std::log2(1.0 + c.power * g); },
            [&](const dist::RealGaussian& c) { return 0.5 * std::log2(1.0 + 2.0 * c.power * g); },
            [&](const dist::AsymGaussian& c) {
                return 0.5 * std::log2(1.0 + 2.0 * c.var_r * g) + 0.5 * std::log2(1.0 + 2.0 * c.var_i * g);
            },
            [&](const dist::OnOff& c) {
                if (c.power == 0.0 || g == 0.0) return 0.0;
                return detail::on_off_mi(c.l, c.power, std::norm(h), noise);
            },
            [&](const dist::Mixture& c) {
                // Time sharing between the two component inputs.
                const double onoff = (c.power == 0.0 || g == 0.0) ? 0.0 : detail::on_off_mi(c.l, c.power, std::norm(h), noise);
                return c.p_ts * std::log2(1.0 + c.power * g) + (1.0 - c.p_ts) * onoff;
            },
            [&](const dist::Constellation& c) {
                if (g == 0.0) return 0.0;
                detail::OutputMixture mix;
                mix.noise = noise;
                for (std::size_t k = 0; k < c.points.size(); ++k) {
                    mix.point.push_back(h * c.points[k]);
                    mix.point_weight.push_back(c.probs[k]);
                }
                return detail::discrete_mi(mix);
            }},
        d);
}

/// Harvested DC power when symbols x ~ dist reach the rectenna through gain h. The
/// mixture family is time sharing, so its energy is the time average of the
/// component powers.
inline double energy_of_distribution(const EhTaylorModel& model, const InputDistribution& d, cplx h) {
    if (const auto* mx = std::get_if<dist::Mixture>(&d)) {
        validate(d);
        CVector c(1);
        c(0) = h;
        const double eg = harvest(model, ReceivedSignal{c, dist::Cscg{mx->power}}).p_dc;
        const double el = harvest(model, ReceivedSignal{c, dist::OnOff{mx->l, mx->power}}).p_dc;
        return mx->p_ts * eg + (1.0 - mx->p_ts) * el;
    }
    CVector c(1);
    c(0) = h;
    return harvest(model, ReceivedSignal{c, d}).p_dc;
}

// ---------------------------------------------------------------------------
// Sweeps and frontiers
// ---------------------------------------------------------------------------

enum class Family { AsymGaussian, OnOff, Mixture };

/// Grid for a family sweep: AsymGaussian uses `a` as P_r values (P_i = P - P_r);
/// OnOff uses `a` as l values; Mixture sweeps the product of `a` (p_ts) and `b` (l).
struct SweepGrid {
    std::vector<double> a;
    std::vector<double> b;

    static SweepGrid linspace(double lo, double hi, int n) {
        SweepGrid g;
        for (int i = 0; i < n; ++i) g.a.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return g;
    }
};

inline std::vector<RePoint> re_sweep_ideal(const EhTaylorModel& model, Family family, double power, cplx h,
                                           double noise, const SweepGrid& grid) {
    model.validate();
    if (!(power > 0.0)) throw DomainError("re_sweep_ideal: power must be > 0");
    std::vector<RePoint> out;
    auto add = [&](const InputDistribution& d, double p1, double p2) {
        RePoint p;
        p.rate = mutual_information(d, h, noise);
        p.energy = energy_of_distribution(model, d, h);
        p.param = p1;
        p.param2 = p2;
        out.push_back(p);
    };
    switch (family) {
        case Family::AsymGaussian:
            for (double pr : grid.a) {
                if (pr < 0.0 || pr > power * (1.0 + 1e-12)) throw DomainError("re_sweep_ideal: P_r outside [0, P]");
                const double prc = std::min(pr, power);
                add(dist::AsymGaussian{prc, power - prc, 0.0, 0.0}, prc, 0.0);
            }
            break;
        case Family::OnOff:
            for (double l : grid.a) add(dist::OnOff{l, power}, l, 0.0);
            break;
        case Family::Mixture:
            for (double p : grid.a)
                for (double l : grid.b) add(dist::Mixture{p, l, power}, p, l);
            break;
    }
    return out;
}

/// Upper-right Pareto frontier sorted by increasing energy (rate nonincreasing).
inline std::vector<RePoint> pareto_frontier(std::vector<RePoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const RePoint& a, const RePoint& b) {
        return a.energy != b.energy ? a.energy > b.energy : a.rate > b.rate;
    });
    std::vector<RePoint> front;
    double best_rate = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        if (p.rate > best_rate) {
            front.push_back(p);
            best_rate = p.rate;
        }
    }
    std::reverse(front.begin(), front.end());
    return front;
}

/// Largest rate among points with energy >= target (-inf if none reaches it).
inline double frontier_rate_at(const std::vector<RePoint>& pts, double energy_target) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts)
        if (p.energy >= energy_target) best = std::max(best, p.rate);
    return best;
}

/// Time switching between an information-favoured input (decoding, no harvesting)
/// and an energy-favoured input (harvesting) with fraction tau on energy; power
/// splitting of the information-favoured input with ratio rho to the harvester.
inline std::vector<RePoint> re_sweep_receiver(const EhTaylorModel& model, const InputDistribution& info,
                                              const InputDistribution& energy, cplx h, double noise,
                                              Receiver receiver, const std::vector<double>& grid) {
    model.validate();
    std::vector<RePoint> out;
    for (double t : grid) {
        if (t < 0.0 || t > 1.0) throw DomainError("re_sweep_receiver: fractions must lie in [0, 1]");
        RePoint p;
        p.receiver = receiver;
        p.param = t;
        if (receiver == Receiver::TimeSwitching) {
            p.rate = (1.0 - t) * mutual_information(info, h, noise);
            p.energy = t * energy_of_distribution(model, energy, h);
        } else if (receiver == Receiver::PowerSplitting) {
            p.rate = mutual_information(info, std::sqrt(1.0 - t) * h, noise);
            p.energy = energy_of_distribution(model, info, std::sqrt(t) * h);
        } else {
            throw DomainError("re_sweep_receiver: receiver must be TS or PS");
        }
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multi-carrier Gaussian inputs
// ---------------------------------------------------------------------------

/// Per-tone input: Re x_n ~ N(mu_r, s_r^2), Im x_n ~ N(mu_i, s_i^2).
struct ToneInput {
    double mu_r = 0.0;
    double mu_i = 0.0;
    double var_r = 0.0;
    double var_i = 0.0;
    double power() const { return mu_r * mu_r + mu_i * mu_i + var_r + var_i; }
};

struct MulticarrierPoint {
    double target = 0.0;
    double rate = 0.0;
    double energy = 0.0;
    std::vector<ToneInput> tones;
};

/// Exact P_dc of superposed multisine means plus independent Gaussian parts. At each
/// time d(t) is the deterministic part and s(t) the Gaussian variance, so
/// E y^2 = d^2 + s and E y^4 = d^4 + 6 d^2 s + 3 s^2; both are time-averaged on the
/// low-IF grid.
class MulticarrierEnergy {
public:
    MulticarrierEnergy(const CVector& h, const EhTaylorModel& model) : model_(model) {
        model.validate();
        if (model.n_o > 4) throw UnsupportedError("multicarrier energy: n_o must be 2 or 4");
        const Eigen::Index N = h.size();
        const std::size_t k = 4 * static_cast<std::size_t>(N);
        const std::size_t S = 64 * static_cast<std::size_t>(N) * 4;
        re_.resize(static_cast<Eigen::Index>(S), N);
        im_.resize(static_cast<Eigen::Index>(S), N);
        for (std::size_t s = 0; s < S; ++s)
            for (Eigen::Index n = 0; n < N; ++n) {
                const std::size_t hh = ((k + static_cast<std::size_t>(n)) * s) % S;
                const cplx e = std::sqrt(2.0) * h(n) * std::polar(1.0, kTwoPi * static_cast<double>(hh) / static_cast<double>(S));
                re_(static_cast<Eigen::Index>(s), n) = e.real();
                im_(static_cast<Eigen::Index>(s), n) = e.imag();
            }
        re2_ = re_.cwiseAbs2();
        im2_ = im_.cwiseAbs2();
    }

    /// Returns v_out; fills dv/d(mu_r, mu_i, var_r, var_i) when grads are non-null.
    double vout(const RVector& mu_r, const RVector& mu_i, const RVector& var_r, const RVector& var_i, RVector* g_mr = nullptr,
                RVector* g_mi = nullptr, RVector* g_vr = nullptr, RVector* g_vi = nullptr, double* m2_out = nullptr) const {
        const RVector d = re_ * mu_r - im_ * mu_i;
        const RVector s = re2_ * var_r + im2_ * var_i;
        const double S = static_cast<double>(d.size());
        const RVector d2 = d.cwiseAbs2();
        const double m2 = (d2 + s).sum() / S;
        const double m4 = (d2.cwiseAbs2() + 6.0 * d2.cwiseProduct(s) + 3.0 * s.cwiseAbs2()).sum() / S;
        const double b2 = model_.beta(2), b4 = model_.beta(4);
        if (m2_out) *m2_out = m2;
        if (g_mr) {
            const RVector dd = (b2 * 2.0 * d + b4 * (4.0 * d.cwiseProduct(d2) + 12.0 * d.cwiseProduct(s))) / S;
            const RVector ds = (RVector::Constant(d.size(), b2) + b4 * (6.0 * d2 + 6.0 * s)) / S;
            *g_mr = re_.transpose() * dd;
            *g_mi = -(im_.transpose() * dd);
            *g_vr = re2_.transpose() * ds;
            *g_vi = im2_.transpose() * ds;
        }
        return b2 * m2 + b4 * m4;
    }

    double p_dc(const std::vector<ToneInput>& t) const {
        RVector a, b, c, d;
        unpack(t, a, b, c, d);
        const double v = vout(a, b, c, d);
        return v * v / model_.r_load;
    }

    static void unpack(const std::vector<ToneInput>& t, RVector& mr, RVector& mi, RVector& vr, RVector& vi) {
        const auto N = static_cast<Eigen::Index>(t.size());
        mr.resize(N), mi.resize(N), vr.resize(N), vi.resize(N);
        for (Eigen::Index n = 0; n < N; ++n) {
            mr(n) = t[static_cast<std::size_t>(n)].mu_r;
            mi(n) = t[static_cast<std::size_t>(n)].mu_i;
            vr(n) = t[static_cast<std::size_t>(n)].var_r;
            vi(n) = t[static_cast<std::size_t>(n)].var_i;
        }
    }

    const EhTaylorModel& model() const { return model_; }

private:
    EhTaylorModel model_;
    RMatrix re_, im_, re2_, im2_;
};

/// Sum over tones of 0.5 log2(1 + 2 var_r |h|^2/noise) + 0.5 log2(1 + 2 var_i |h|^2/noise).
inline double multicarrier_rate(const CVector& h, double noise, const std::vector<ToneInput>& t) {
    double r = 0.0;
    for (Eigen::Index n = 0; n < h.size(); ++n) {
        const double g = std::norm(h(n)) / noise;
        r += 0.5 * std::log2(1.0 + 2.0 * t[static_cast<std::size_t>(n)].var_r * g) +
             0.5 * std::log2(1.0 + 2.0 * t[static_cast<std::size_t>(n)].var_i * g);
    }
    return r;
}

/// Classic water-filling over tones for CSCG inputs: p_n = (mu - noise/|h_n|^2)^+.
inline std::vector<double> water_filling(const CVector& h, double noise, double power) {
    const Eigen::Index N = h.size();
    std::vector<double> inv;
    for (Eigen::Index n = 0; n < N; ++n) inv.push_back(std::norm(h(n)) > 0.0 ? noise / std::norm(h(n)) : std::numeric_limits<double>::infinity());
    std::vector<double> sorted = inv;
    std::sort(sorted.begin(), sorted.end());
    double level = 0.0;
    for (std::size_t k = sorted.size(); k >= 1; --k) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += sorted[j];
        const double mu = (power + s) / static_cast<double>(k);
        if (mu > sorted[k - 1]) {
            level = mu;
            break;
        }
    }
    std::vector<double> p(static_cast<std::size_t>(N));
    for (Eigen::Index n = 0; n < N; ++n) p[static_cast<std::size_t>(n)] = std::max(level - inv[static_cast<std::size_t>(n)], 0.0);
    return p;
}

struct MulticarrierOptions {
    bool zero_mean_only = false;  // restrict to zero-mean (ZG) inputs
};

namespace detail {

/// Variables: per tone [mu_r, mu_i, s_r, s_i] with var = s^2; feasible set is the ball
/// sum(mu^2 + s^2) <= P.
inline std::vector<ToneInput> tones_from(std::span<const double> x, Eigen::Index N) {
    std::vector<ToneInput> t(static_cast<std::size_t>(N));
    for (Eigen::Index n = 0; n < N; ++n) {
        auto& e = t[static_cast<std::size_t>(n)];
        e.mu_r = x[static_cast<std::size_t>(4 * n)];
        e.mu_i = x[static_cast<std::size_t>(4 * n + 1)];
        e.var_r = x[static_cast<std::size_t>(4 * n + 2)] * x[static_cast<std::size_t>(4 * n + 2)];
        e.var_i = x[static_cast<std::size_t>(4 * n + 3)] * x[static_cast<std::size_t>(4 * n + 3)];
    }
    return t;
}

inline std::vector<double> vars_from(const std::vector<ToneInput>& t) {
    std::vector<double> x;
    for (const auto& e : t) {
        x.push_back(e.mu_r);
        x.push_back(e.mu_i);
        x.push_back(std::sqrt(e.var_r));
        x.push_back(std::sqrt(e.var_i));
    }
    return x;
}

}  // namespace detail

/// Zero-mean symmetric water-filling input (the Ebar = 0 solution).
inline std::vector<ToneInput> zero_mean_water_filling(const CVector& h, double noise, double power) {
    const auto p = water_filling(h, noise, power);
    std::vector<ToneInput> t(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) t[n].var_r = t[n].var_i = 0.5 * p[n];
    return t;
}

/// Deterministic multisine maximising P_dc, expressed as per-tone means.
inline std::vector<ToneInput> deterministic_tone_inputs(const CVector& h, const EhTaylorModel& model, double power,
                                                        const SolverConfig& cfg) {
    const RVector s = optimize_amplitudes(h.cwiseAbs(), model, power, cfg);
    std::vector<ToneInput> t(static_cast<std::size_t>(h.size()));
    for (Eigen::Index n = 0; n < h.size(); ++n) {
        const cplx mu = s(n) * std::polar(1.0, -std::arg(h(n)));
        t[static_cast<std::size_t>(n)].mu_r = mu.real();
        t[static_cast<std::size_t>(n)].mu_i = mu.imag();
    }
    return t;
}

/// Rate-energy frontier with (possibly non-zero mean, asymmetric) Gaussian inputs
/// per tone. Each target is solved by a quadratic penalty on the normalised voltage
/// shortfall with increasing weight, followed by a feasibility restoration that
/// blends towards the energy-maximising multisine.
inline std::vector<MulticarrierPoint> re_multicarrier_gaussian(const EhTaylorModel& model, const CVector& h, double noise,
                                                               double power, const std::vector<double>& targets,
                                                               const SolverConfig& cfg = {},
                                                               const MulticarrierOptions& opt = {}) {
    model.validate();
    if (model.n_o != 4) throw UnsupportedError("re_multicarrier_gaussian: requires n_o = 4");
    if (h.size() < 1) throw DimensionError("re_multicarrier_gaussian: need at least one tone");
    if (!(noise > 0.0) || !(power > 0.0)) throw DomainError("re_multicarrier_gaussian: power and noise must be > 0");
    const Eigen::Index N = h.size();
    const MulticarrierEnergy energy(h, model);

    const auto zg = zero_mean_water_filling(h, noise, power);
    const auto det = deterministic_tone_inputs(h, model, power, cfg);
    const double e_max = energy.p_dc(det);
    const double e_zg = energy.p_dc(zg);

    std::vector<MulticarrierPoint> out;
    for (double target : targets) {
        if (target < 0.0) throw DomainError("re_multicarrier_gaussian: energy targets must be >= 0");
        if (target > e_max * (1.0 + 1e-9))
            throw InfeasibleError("re_multicarrier_gaussian: target " + std::to_string(target) +
                                  " W exceeds the maximum deterministic energy " + std::to_string(e_max) + " W");
        const double v_target = std::sqrt(target * model.r_load);

        auto evaluate = [&](const std::vector<ToneInput>& t) {
            MulticarrierPoint p;
            p.target = target;
            p.tones = t;
            p.rate = multicarrier_rate(h, noise, t);
            p.energy = energy.p_dc(t);
            return p;
        };

        // Blend towards the energy-maximising point until the target is met.
        auto restore = [&](const std::vector<ToneInput>& t) {
            if (energy.p_dc(t) >= target) return t;
            const auto xa = detail::vars_from(t);
            const auto xb = detail::vars_from(opt.zero_mean_only ? zg : det);
            auto mix = [&](double a) {
                std::vector<double> x(xa.size());
                for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - a) * xa[i] + a * xb[i];
                Ball::project(x, power);
                return detail::tones_from(x, N);
            };
            if (energy.p_dc(mix(1.0)) < target) return mix(1.0);
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double m = 0.5 * (lo + hi);
                (energy.p_dc(mix(m)) >= target ? hi : lo) = m;
            }
            return mix(hi);
        };

        std::vector<std::vector<double>> starts;
        starts.push_back(detail::vars_from(zg));
        if (!opt.zero_mean_only) {
            starts.push_back(detail::vars_from(det));
            for (double a : {0.25, 0.5, 0.75}) {
                std::vector<double> x = detail::vars_from(zg), y = detail::vars_from(det);
                for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sqrt(1.0 - a) * x[i] + std::sqrt(a) * y[i];
                starts.push_back(x);
            }
        } else {
            for (double a : {0.25, 0.5, 0.75}) {
                // Shift zero-mean power towards the strongest tone, keeping real/imag split.
                auto t = zg;
                const Eigen::Index best = detail::argmax_lowest(h.cwiseAbs());
                for (auto& e : t) e.var_r *= (1.0 - a), e.var_i *= (1.0 - a);
                t[static_cast<std::size_t>(best)].var_r += a * power;
                starts.push_back(detail::vars_from(t));
            }
        }

        SolverConfig local = cfg;
        const double rate_scale = 1.0 / std::max(1.0, static_cast<double>(N));
        std::vector<double> best_x;
        for (double rho : {10.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
            GradObjective obj = [&, rho](std::span<const double> x, std::span<double> g) {
                RVector mr(N), mi(N), vr(N), vi(N);
                for (Eigen::Index n = 0; n < N; ++n) {
                    mr(n) = opt.zero_mean_only ? 0.0 : x[static_cast<std::size_t>(4 * n)];
                    mi(n) = opt.zero_mean_only ? 0.0 : x[static_cast<std::size_t>(4 * n + 1)];
                    vr(n) = x[static_cast<std::size_t>(4 * n + 2)] * x[static_cast<std::size_t>(4 * n + 2)];
                    vi(n) = x[static_cast<std::size_t>(4 * n + 3)] * x[static_cast<std::size_t>(4 * n + 3)];
                }
                RVector gmr, gmi, gvr, gvi;
                const double v = energy.vout(mr, mi, vr, vi, &gmr, &gmi, &gvr, &gvi);
                double f = 0.0;
                const double short_fall = v_target > 0.0 ? std::max(0.0, 1.0 - v / v_target) : 0.0;
                f -= rho * short_fall * short_fall;
                const double dpen_dv = v_target > 0.0 && short_fall > 0.0 ? 2.0 * rho * short_fall / v_target : 0.0;
                for (Eigen::Index n = 0; n < N; ++n) {
                    const double gn = std::norm(h(n)) / noise;
                    const double sr = x[static_cast<std::size_t>(4 * n + 2)], si = x[static_cast<std::size_t>(4 * n + 3)];
                    const double rr = 0.5 * std::log2(1.0 + 2.0 * sr * sr * gn);
                    const double ri = 0.5 * std::log2(1.0 + 2.0 * si * si * gn);
                    f += rate_scale * (rr + ri);
                    const double dr = rate_scale * (2.0 * sr * gn) / (kLn2 * (1.0 + 2.0 * sr * sr * gn));
                    const double di = rate_scale * (2.0 * si * gn) / (kLn2 * (1.0 + 2.0 * si * si * gn));
                    g[static_cast<std::size_t>(4 * n)] = opt.zero_mean_only ? 0.0 : dpen_dv * gmr(n);
                    g[static_cast<std::size_t>(4 * n + 1)] = opt.zero_mean_only ? 0.0 : dpen_dv * gmi(n);
                    g[static_cast<std::size_t>(4 * n + 2)] = dr + dpen_dv * gvr(n) * 2.0 * sr;
                    g[static_cast<std::size_t>(4 * n + 3)] = di + dpen_dv * gvi(n) * 2.0 * si;
                }
                return f;
            };
            const PgResult r = projected_gradient_max<Ball>(obj, static_cast<std::size_t>(4 * N), power, local, starts);
            best_x = r.x;
            // Warm start the next penalty level from the current best plus the feasible anchors.
            starts.assign(1, r.x);
            starts.push_back(detail::vars_from(opt.zero_mean_only ? zg : det));
            if (e_zg >= target) starts.push_back(detail::vars_from(zg));
            local.restarts = 1;
            if (energy.p_dc(detail::tones_from(r.x, N)) >= target * (1.0 - 1e-9)) break;
        }
        auto t = detail::tones_from(best_x, N);
        if (opt.zero_mean_only)
            for (auto& e : t) e.mu_r = e.mu_i = 0.0;
        // Candidates: the penalty solution (restored), ZG water-filling and the multisine.
        std::vector<MulticarrierPoint> cands{evaluate(restore(t))};
        if (e_zg >= target) cands.push_back(evaluate(zg));
        if (!opt.zero_mean_only) cands.push_back(evaluate(det));
        MulticarrierPoint best;
        best.rate = -1.0;
        for (const auto& c : cands)
            if (c.energy >= target * (1.0 - 1e-12) && c.rate > best.rate) best = c;
        if (best.rate < 0.0) {
            if (opt.zero_mean_only)
                throw InfeasibleError("re_multicarrier_gaussian: target not reachable with zero-mean inputs");
            best = cands.back();
        }
        out.push_back(best);
    }
    return out;
}

/// Maximum deterministic energy (the frontier's right end).
inline double multicarrier_max_energy(const EhTaylorModel& model, const CVector& h, double power,
                                      const SolverConfig& cfg = {}) {
    const MulticarrierEnergy energy(h, model);
    return energy.p_dc(deterministic_tone_inputs(h, model, power, cfg));
}

/// IRS-aided SWIPT with one transmit antenna: Theta is designed on the tone with the
/// largest reflect/incident product and applied to every tone; the resulting SISO
/// channel goes through re_multicarrier_gaussian.
enum class IrsArchitecture { None, Single, Group, Fully };

inline CVector irs_effective_tones(const std::vector<cplx>& g_d, const std::vector<CVector>& g_r,
                                   const std::vector<CVector>& g_i, IrsArchitecture arch, Eigen::Index group_size,
                                   IrsConfig* cfg_out = nullptr) {
    const std::size_t N = g_d.size();
    CVector h(static_cast<Eigen::Index>(N));
    if (arch == IrsArchitecture::None || g_r.empty() || g_r.front().size() == 0) {
        for (std::size_t n = 0; n < N; ++n) h(static_cast<Eigen::Index>(n)) = g_d[n];
        return h;
    }
    if (g_r.size() != N || g_i.size() != N) throw DimensionError("re_irs: per-tone channel lists differ");
    const std::size_t k = strongest_product_tone(g_r, g_i);
    IrsResult r;
    switch (arch) {
        case IrsArchitecture::Single: r = optimize_single_connected(g_d[k], g_r[k], g_i[k]); break;
        case IrsArchitecture::Group: r = optimize_group_connected(g_d[k], g_r[k], g_i[k], group_size); break;
        default: r = optimize_fully_connected(g_d[k], g_r[k], g_i[k]); break;
    }
    for (std::size_t n = 0; n < N; ++n)
        h(static_cast<Eigen::Index>(n)) = irs_effective_channel(g_d[n], g_r[n], r.config.theta, g_i[n]);
    if (cfg_out) *cfg_out = r.config;
    return h;
}

inline std::vector<MulticarrierPoint> re_irs(const EhTaylorModel& model, const std::vector<cplx>& g_d,
                                             const std::vector<CVector>& g_r, const std::vector<CVector>& g_i,
                                             IrsArchitecture arch, Eigen::Index group_size, double noise, double power,
                                             const std::vector<double>& targets, const SolverConfig& cfg = {}) {
    const CVector h = irs_effective_tones(g_d, g_r, g_i, arch, group_size);
    return re_multicarrier_gaussian(model, h, noise, power, targets, cfg);
}

inline void write_frontier_csv(std::ostream& os, const std::vector<RePoint>& pts) {
    os << "receiver,param,rate_bits,energy_watts\n";
    os.precision(12);
    for (const auto& p : pts) os << receiver_name(p.receiver) << ',' << p.param << ',' << p.rate << ',' << p.energy << '\n';
}

}  // namespace wptlab
