#pragma once

// Learned components: a 1-3-2-1 tanh regression network for the harvester input/output
// map, and end-to-end training of a constellation against a cross-entropy plus
// inverse-harvested-power loss.

#include "wptlab/errors.hpp"
#include "wptlab/hpa.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/rate_energy.hpp"
#include "wptlab/rectenna.hpp"
#include "wptlab/types.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wptlab {

struct EhSample {
    double p_in = 0.0;  // W
    double p_dc = 0.0;  // W
};

/// Tanh network 1 -> 3 -> 2 -> 1 on a standardised input; the output unit maps
/// (-0.9, 0.9) affinely onto [out_min, out_max].
struct EhSurrogate {
    static constexpr std::size_t kParams = 3 + 3 + 6 + 2 + 2 + 1;

    Eigen::Matrix<double, 3, 1> w1 = Eigen::Matrix<double, 3, 1>::Zero();
    Eigen::Matrix<double, 3, 1> b1 = Eigen::Matrix<double, 3, 1>::Zero();
    Eigen::Matrix<double, 2, 3> w2 = Eigen::Matrix<double, 2, 3>::Zero();
    Eigen::Matrix<double, 2, 1> b2 = Eigen::Matrix<double, 2, 1>::Zero();
    Eigen::Matrix<double, 1, 2> w3 = Eigen::Matrix<double, 1, 2>::Zero();
    double b3 = 0.0;

    double in_mean = 0.0;
    double in_std = 1.0;
    double out_min = 0.0;
    double out_max = 1.0;

    static constexpr double kSpan = 0.9;

    std::array<double, kParams> params() const {
        std::array<double, kParams> p{};
        std::size_t k = 0;
        for (int i = 0; i < 3; ++i) p[k++] = w1(i);
        for (int i = 0; i < 3; ++i) p[k++] = b1(i);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 3; ++c) p[k++] = w2(r, c);
        for (int i = 0; i < 2; ++i) p[k++] = b2(i);
        for (int i = 0; i < 2; ++i) p[k++] = w3(i);
        p[k++] = b3;
        return p;
    }

    void set_params(std::span<const double> p) {
        if (p.size() != kParams) throw DimensionError("EhSurrogate: wrong parameter count");
        std::size_t k = 0;
        for (int i = 0; i < 3; ++i) w1(i) = p[k++];
        for (int i = 0; i < 3; ++i) b1(i) = p[k++];
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 3; ++c) w2(r, c) = p[k++];
        for (int i = 0; i < 2; ++i) b2(i) = p[k++];
        for (int i = 0; i < 2; ++i) w3(i) = p[k++];
        b3 = p[k++];
    }

    /// Network output in (-1, 1) for a standardised input z.
    double raw(double z) const {
        const Eigen::Vector3d h1 = (w1 * z + b1).array().tanh();
        const Eigen::Vector2d h2 = (w2 * h1 + b2).array().tanh();
        return std::tanh((w3 * h2)(0) + b3);
    }

    double predict(double p_in) const {
        const double o = raw((p_in - in_mean) / in_std);
        return out_min + (o + kSpan) / (2.0 * kSpan) * (out_max - out_min);
    }

    /// d predict / d p_in.
    double derivative(double p_in) const {
        const double z = (p_in - in_mean) / in_std;
        const Eigen::Vector3d a1 = w1 * z + b1;
        const Eigen::Vector3d h1 = a1.array().tanh();
        const Eigen::Vector2d a2 = w2 * h1 + b2;
        const Eigen::Vector2d h2 = a2.array().tanh();
        const double o = std::tanh((w3 * h2)(0) + b3);
        const Eigen::Vector2d d2 = (w3.transpose().array() * (1.0 - h2.array().square())).matrix();
        const Eigen::Vector3d d1 = ((w2.transpose() * d2).array() * (1.0 - h1.array().square())).matrix();
        const double dz = (1.0 - o * o) * w1.dot(d1);
        return dz / in_std * (out_max - out_min) / (2.0 * kSpan);
    }

    bool finite() const {
        for (double v : params())
            if (!std::isfinite(v)) return false;
        return std::isfinite(in_mean) && std::isfinite(in_std) && std::isfinite(out_min) && std::isfinite(out_max);
    }
};

/// Mean squared error in the network's output space over standardised data, and its
/// gradient with respect to the 17 parameters (manual backpropagation).
inline double surrogate_loss(const EhSurrogate& net, const std::vector<double>& z, const std::vector<double>& target,
                             std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    Eigen::Vector3d gw1 = Eigen::Vector3d::Zero(), gb1 = Eigen::Vector3d::Zero();
    Eigen::Matrix<double, 2, 3> gw2 = Eigen::Matrix<double, 2, 3>::Zero();
    Eigen::Vector2d gb2 = Eigen::Vector2d::Zero();
    Eigen::Matrix<double, 1, 2> gw3 = Eigen::Matrix<double, 1, 2>::Zero();
    double gb3 = 0.0, loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const Eigen::Vector3d h1 = (net.w1 * z[i] + net.b1).array().tanh();
        const Eigen::Vector2d h2 = (net.w2 * h1 + net.b2).array().tanh();
        const double o = std::tanh((net.w3 * h2)(0) + net.b3);
        const double e = o - target[i];
        loss += e * e * inv_n;
        const double d3 = 2.0 * e * inv_n * (1.0 - o * o);
        gw3 += d3 * h2.transpose();
        gb3 += d3;
        const Eigen::Vector2d d2 = (net.w3.transpose() * d3).array() * (1.0 - h2.array().square());
        gw2 += d2 * h1.transpose();
        gb2 += d2;
        const Eigen::Vector3d d1 = (net.w2.transpose() * d2).array() * (1.0 - h1.array().square());
        gw1 += d1 * z[i];
        gb1 += d1;
    }
    if (!grad.empty()) {
        std::size_t k = 0;
        for (int i = 0; i < 3; ++i) grad[k++] = gw1(i);
        for (int i = 0; i < 3; ++i) grad[k++] = gb1(i);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 3; ++c) grad[k++] = gw2(r, c);
        for (int i = 0; i < 2; ++i) grad[k++] = gb2(i);
        for (int i = 0; i < 2; ++i) grad[k++] = gw3(i);
        grad[k++] = gb3;
    }
    return loss;
}

/// Fits the surrogate by full-batch gradient descent with momentum 0.9.
inline EhSurrogate fit_eh_surrogate(const std::vector<EhSample>& samples, int epochs, double lr, std::uint64_t seed) {
    if (samples.size() < 10) throw DomainError("fit_eh_surrogate: need at least 10 samples");
    if (epochs < 1 || !(lr > 0.0)) throw DomainError("fit_eh_surrogate: epochs >= 1 and lr > 0 required");
    EhSurrogate net;
    double mean = 0.0, lo = samples.front().p_dc, hi = samples.front().p_dc;
    for (const auto& s : samples) {
        if (!std::isfinite(s.p_in) || !std::isfinite(s.p_dc)) throw NonFiniteError("fit_eh_surrogate: non-finite sample");
        mean += s.p_in;
        lo = std::min(lo, s.p_dc);
        hi = std::max(hi, s.p_dc);
    }
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const auto& s : samples) var += (s.p_in - mean) * (s.p_in - mean);
    const double sd = std::sqrt(var / static_cast<double>(samples.size()));
    net.in_mean = mean;
    net.in_std = sd > 0.0 ? sd : 1.0;
    net.out_min = lo;
    net.out_max = hi;  // constant data collapses the output map onto lo

    std::vector<double> z, t;
    for (const auto& s : samples) {
        z.push_back((s.p_in - net.in_mean) / net.in_std);
        t.push_back(hi > lo ? -EhSurrogate::kSpan + 2.0 * EhSurrogate::kSpan * (s.p_dc - lo) / (hi - lo) : -EhSurrogate::kSpan);
    }

    auto rng = make_rng(seed, 0x5a);
    std::normal_distribution<double> nd;
    std::array<double, EhSurrogate::kParams> p{};
    // Xavier-style scales: fan-in 1, 3, 2.
    const std::array<double, EhSurrogate::kParams> sc{1, 1, 1, 0.1, 0.1, 0.1, 0.58, 0.58, 0.58, 0.58, 0.58, 0.58, 0.1, 0.1, 0.7, 0.7, 0.1};
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = sc[k] * nd(rng);
    net.set_params(p);

    std::array<double, EhSurrogate::kParams> g{}, vel{};
    for (int e = 0; e < epochs; ++e) {
        const double loss = surrogate_loss(net, z, t, g);
        if (!std::isfinite(loss)) throw DivergenceError("fit_eh_surrogate: loss became non-finite at epoch " + std::to_string(e));
        for (std::size_t k = 0; k < p.size(); ++k) {
            vel[k] = 0.9 * vel[k] - lr * g[k];
            p[k] += vel[k];
        }
        net.set_params(p);
    }
    if (!net.finite()) throw DivergenceError("fit_eh_surrogate: parameters became non-finite");
    return net;
}

// ---------------------------------------------------------------------------
// Learned modulation
// ---------------------------------------------------------------------------

using HarvesterModel = std::variant<EhTaylorModel, EhSurrogate>;

struct ModulationOptions {
    int symbols = 16;
    double power = 1e-5;    // W
    double noise = 1e-7;    // W
    double lambda = 0.0;    // W (weight of 1/P_dc)
    int batch = 256;
    int iterations = 3000;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    std::optional<HpaModel> hpa;  // applied to the complex envelope after power normalisation
    double pdc_floor = 1e-15;     // W; below this the penalty is clipped
};

struct LearnedConstellation {
    std::vector<cplx> points;      // encoder output, (1/S) sum |x|^2 = P
    std::vector<cplx> channel_in;  // after the amplifier (what the channel and harvester see)
    double power = 0.0;
    double noise = 0.0;
    double lambda = 0.0;
    double rate = 0.0;   // bits/use
    double p_dc = 0.0;   // W
    double symbol_error = 0.0;
    std::vector<double> loss_trace;
    bool penalty_clipped = false;
};

namespace detail {

/// Batch P_dc and dP/d u_k (as a complex gradient dRe + j dIm) for per-symbol counts.
inline double batch_pdc(const HarvesterModel& model, const std::vector<cplx>& u, const std::vector<int>& counts, int batch,
                        std::vector<cplx>& grad) {
    grad.assign(u.size(), cplx(0.0));
    const double inv_b = 1.0 / static_cast<double>(batch);
    if (const auto* tm = std::get_if<EhTaylorModel>(&model)) {
        double e2 = 0.0, e4 = 0.0, e6 = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double a2 = std::norm(u[k]);
            e2 += counts[k] * a2 * inv_b;
            e4 += counts[k] * a2 * a2 * inv_b;
            e6 += counts[k] * a2 * a2 * a2 * inv_b;
        }
        const double v = tm->beta(2) * e2 + tm->beta(4) * 1.5 * e4 + tm->beta(6) * 2.5 * e6;
        const double dp_dv = 2.0 * v / tm->r_load;
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double a2 = std::norm(u[k]);
            // d|u|^{2m}/du = 2m |u|^{2m-2} u
            const double dv_da2 = tm->beta(2) + tm->beta(4) * 1.5 * 2.0 * a2 + tm->beta(6) * 2.5 * 3.0 * a2 * a2;
            grad[k] = dp_dv * counts[k] * inv_b * dv_da2 * 2.0 * u[k];
        }
        return v * v / tm->r_load;
    }
    const auto& net = std::get<EhSurrogate>(model);
    double p = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (counts[k] == 0) continue;
        const double a2 = std::norm(u[k]);
        p += counts[k] * inv_b * net.predict(a2);
        grad[k] = counts[k] * inv_b * net.derivative(a2) * 2.0 * u[k];
    }
    return p;
}

/// Amplifier output and its real 2x2 Jacobian (applied to a complex gradient).
inline cplx amp_backprop(const std::optional<HpaModel>& hpa, cplx x, cplx g_out) {
    if (!hpa) return g_out;
    if (const auto* l = std::get_if<hpa::Linear>(&*hpa)) return l->gain * g_out;
    const auto& r = std::get<hpa::Rapp>(*hpa);
    const double a = std::abs(x);
    if (a == 0.0) return r.gain * g_out;
    const cplx u = x / a;
    // J = g'(a) u u^T + (g(a)/a)(I - u u^T) on R^2, symmetric.
    const double along = (std::conj(u) * g_out).real();
    const cplx radial = along * u;
    const cplx tangential = g_out - radial;
    return rapp_derivative(r, a) * radial + (rapp_magnitude(r, a) / a) * tangential;
}

inline void normalize_power(std::vector<cplx>& x, double power) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    const double scale = std::sqrt(power * static_cast<double>(x.size()) / s);
    for (auto& v : x) v *= scale;
}

}  // namespace detail

inline double harvested_power(const HarvesterModel& model, const std::vector<cplx>& channel_in) {
    std::vector<int> counts(channel_in.size(), 1);
    std::vector<cplx> g;
    return detail::batch_pdc(model, channel_in, counts, static_cast<int>(channel_in.size()), g);
}

/// Trains S constellation points with Adam on the batch loss
/// mean CE(s, softmax(-|y - u_k|^2/noise)) + lambda / P_dc(batch), renormalising to
/// average power P after every step. The decoder is the Gaussian-likelihood softmax
/// over the amplifier outputs u_k.
inline LearnedConstellation train_modulation(const HarvesterModel& model, const ModulationOptions& o) {
    const int S = o.symbols;
    if (S < 2 || (S & (S - 1)) != 0) throw DomainError("train_modulation: S must be a power of two");
    if (!(o.lambda >= 0.0)) throw DomainError("train_modulation: lambda must be >= 0");
    if (!(o.power > 0.0) || !(o.noise > 0.0)) throw DomainError("train_modulation: power and noise must be > 0");
    if (o.batch < 1 || o.iterations < 1) throw DomainError("train_modulation: batch and iterations must be >= 1");
    if (const auto* tm = std::get_if<EhTaylorModel>(&model)) tm->validate();
    if (o.hpa) validate(*o.hpa);

    auto rng = make_rng(o.seed, 0x30d);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> pick(0, S - 1);
    std::vector<cplx> x(static_cast<std::size_t>(S));
    for (auto& v : x) {
        const double re = nd(rng);
        const double im = nd(rng);
        v = cplx(re, im);
    }
    detail::normalize_power(x, o.power);

    auto amp = [&](cplx v) { return o.hpa ? apply_envelope(*o.hpa, v) : v; };
    const double root_p = std::sqrt(o.power);
    const double noise_sd = std::sqrt(o.noise / 2.0);

    LearnedConstellation out;
    out.power = o.power;
    out.noise = o.noise;
    out.lambda = o.lambda;

    // Adam state on the normalised coordinates x / sqrt(P).
    std::vector<cplx> m1(x.size(), 0.0), m2(x.size(), 0.0);
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::vector<cplx> u(x.size()), gu(x.size()), gp;
    std::vector<int> counts(x.size());
    std::vector<double> logits(x.size()), prob(x.size());
    for (int it = 1; it <= o.iterations; ++it) {
        for (std::size_t k = 0; k < x.size(); ++k) u[k] = amp(x[k]);
        std::fill(gu.begin(), gu.end(), cplx(0.0));
        std::fill(counts.begin(), counts.end(), 0);
        double ce = 0.0;
        for (int b = 0; b < o.batch; ++b) {
            const int s = pick(rng);
            ++counts[static_cast<std::size_t>(s)];
            const double nr = noise_sd * nd(rng);
            const double ni = noise_sd * nd(rng);
            const cplx y = u[static_cast<std::size_t>(s)] + cplx(nr, ni);
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < x.size(); ++k) {
                logits[k] = -std::norm(y - u[k]) / o.noise;
                mx = std::max(mx, logits[k]);
            }
            double z = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) z += (prob[k] = std::exp(logits[k] - mx));
            for (auto& p : prob) p /= z;
            ce += -(logits[static_cast<std::size_t>(s)] - mx - std::log(z));
            // dCE/dlogit_k = p_k - delta_ks; dlogit_k/du_k = 2(y - u_k)/noise; dlogit_k/dy = -2(y - u_k)/noise
            cplx gy = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double dl = prob[k] - (static_cast<int>(k) == s ? 1.0 : 0.0);
                const cplx dir = 2.0 * (y - u[k]) / o.noise;
                gu[k] += dl * dir / static_cast<double>(o.batch);
                gy -= dl * dir;
            }
            gu[static_cast<std::size_t>(s)] += gy / static_cast<double>(o.batch);
        }
        ce /= o.batch;
        double loss = ce;
        if (o.lambda > 0.0) {
            const double p = detail::batch_pdc(model, u, counts, o.batch, gp);
            if (p < o.pdc_floor) {
                out.penalty_clipped = true;
                loss += o.lambda / o.pdc_floor;
            } else {
                loss += o.lambda / p;
                const double coef = -o.lambda / (p * p);
                for (std::size_t k = 0; k < x.size(); ++k) gu[k] += coef * gp[k];
            }
        }
        out.loss_trace.push_back(loss);
        for (std::size_t k = 0; k < x.size(); ++k) {
            const cplx g = detail::amp_backprop(o.hpa, x[k], gu[k]) * root_p;  // gradient in normalised units
            m1[k] = b1 * m1[k] + (1.0 - b1) * g;
            m2[k] = b2 * m2[k] + (1.0 - b2) * cplx(g.real() * g.real(), g.imag() * g.imag());
            const cplx mh = m1[k] / (1.0 - std::pow(b1, it));
            const cplx vh = m2[k] / (1.0 - std::pow(b2, it));
            const cplx step(mh.real() / (std::sqrt(vh.real()) + eps), mh.imag() / (std::sqrt(vh.imag()) + eps));
            x[k] -= o.learning_rate * root_p * step;
        }
        detail::normalize_power(x, o.power);
    }
    if (out.penalty_clipped)
        std::fprintf(stderr, "train_modulation: warning: P_dc fell below %.3g W; penalty was clipped\n", o.pdc_floor);

    out.points = x;
    for (std::size_t k = 0; k < x.size(); ++k) u[k] = amp(x[k]);
    out.channel_in = u;
    dist::Constellation c;
    c.points = u;
    c.probs.assign(u.size(), 1.0 / static_cast<double>(u.size()));
    out.rate = mutual_information(c, 1.0, o.noise);
    out.p_dc = harvested_power(model, u);
    // Symbol error rate of the nearest-point decoder, fixed-seed Monte Carlo.
    auto erng = make_rng(o.seed, 0xe77);
    const int trials = 20000;
    int errors = 0;
    for (int t = 0; t < trials; ++t) {
        const int s = pick(erng);
        const double nr = noise_sd * nd(erng);
        const double ni = noise_sd * nd(erng);
        const cplx y = u[static_cast<std::size_t>(s)] + cplx(nr, ni);
        std::size_t best = 0;
        for (std::size_t k = 1; k < u.size(); ++k)
            if (std::norm(y - u[k]) < std::norm(y - u[best])) best = k;
        errors += static_cast<int>(best) != s;
    }
    out.symbol_error = static_cast<double>(errors) / trials;
    return out;
}

}  // namespace wptlab
