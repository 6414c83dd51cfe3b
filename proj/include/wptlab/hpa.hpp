#pragma once

// Memoryless transmit amplifier models (ideal linear and Rapp solid-state).

#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/signal.hpp"
#include "wptlab/types.hpp"

#include <cmath>
#include <span>
#include <variant>
#include <vector>

namespace wptlab {

namespace hpa {

struct Linear {
    double gain = 1.0;
    double e1 = 1.0;
};

/// out = G x / (1 + (G|x|/A_s)^{2 beta})^{1/(2 beta)}
struct Rapp {
    double gain = 1.0;
    double a_s = 1e-3;
    double beta = 1.0;
};

}  // namespace hpa

using HpaModel = std::variant<hpa::Linear, hpa::Rapp>;

inline void validate(const HpaModel& m) {
    std::visit(detail::overloaded{[](const hpa::Linear& l) {
                                      if (!(l.gain > 0.0)) throw DomainError("hpa: gain must be > 0");
                                      if (!(l.e1 > 0.0 && l.e1 <= 1.0)) throw DomainError("hpa: e1 must be in (0, 1]");
                                  },
                                  [](const hpa::Rapp& r) {
                                      if (!(r.gain > 0.0)) throw DomainError("hpa: gain must be > 0");
                                      if (!(r.a_s > 0.0)) throw DomainError("hpa: a_s must be > 0");
                                      if (!(r.beta >= 1.0)) throw DomainError("hpa: beta must be >= 1");
                                  }},
               m);
}

/// Rapp gain characteristic on a magnitude; written so that huge inputs saturate
/// instead of overflowing.
inline double rapp_magnitude(const hpa::Rapp& r, double mag) {
    const double u = r.gain * mag / r.a_s;
    const double p = 2.0 * r.beta;
    if (u <= 1.0) return r.gain * mag / std::pow(1.0 + std::pow(u, p), 1.0 / p);
    return r.a_s / std::pow(1.0 + std::pow(u, -p), 1.0 / p);
}

/// d out / d mag for the Rapp characteristic.
inline double rapp_derivative(const hpa::Rapp& r, double mag) {
    const double u = r.gain * mag / r.a_s;
    const double p = 2.0 * r.beta;
    return r.gain * std::pow(1.0 + std::pow(u, p), -1.0 / p - 1.0);
}

inline double apply(const HpaModel& m, double x) {
    return std::visit(detail::overloaded{[&](const hpa::Linear& l) { return l.gain * x; },
                                         [&](const hpa::Rapp& r) { return std::copysign(rapp_magnitude(r, std::abs(x)), x); }},
                      m);
}

inline std::vector<double> apply(const HpaModel& m, std::span<const double> in) {
    validate(m);
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = apply(m, in[i]);
    return out;
}

/// AM/AM on a complex envelope sample (phase preserved).
inline cplx apply_envelope(const HpaModel& m, cplx x) {
    return std::visit(detail::overloaded{[&](const hpa::Linear& l) { return l.gain * x; },
                                         [&](const hpa::Rapp& r) {
                                             const double a = std::abs(x);
                                             if (a == 0.0) return cplx(0.0, 0.0);
                                             return x * (rapp_magnitude(r, a) / a);
                                         }},
                      m);
}

namespace detail {

/// Passband samples of antenna m's deterministic signal, one period, low-IF grid.
inline std::vector<double> antenna_waveform(const CVector& x, std::size_t samples) {
    const Eigen::Index N = x.size();
    const std::size_t k = 8 * static_cast<std::size_t>(N);
    std::vector<double> y(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        cplx acc = 0.0;
        for (Eigen::Index n = 0; n < N; ++n) {
            const std::size_t h = ((k + static_cast<std::size_t>(n)) * s) % samples;
            acc += x(n) * std::polar(1.0, kTwoPi * static_cast<double>(h) / static_cast<double>(samples));
        }
        y[s] = std::sqrt(2.0) * acc.real();
    }
    return y;
}

}  // namespace detail

/// DC-to-RF efficiency report. Linear: the configured constant. Rapp: output RF
/// power over G^2 times input power, time-averaged over one period (1 in the
/// linear regime). Stochastic subbands are evaluated on 256 fixed-seed symbol draws.
inline double e1_report(const HpaModel& model, const SignalSpec& sig) {
    validate(model);
    if (const auto* l = std::get_if<hpa::Linear>(&model)) return l->e1;
    const auto& r = std::get<hpa::Rapp>(model);
    const Eigen::Index N = sig.tones();
    const std::size_t samples = 512 * static_cast<std::size_t>(std::max<Eigen::Index>(N, 1));
    const int draws = sig.deterministic_only() ? 1 : 256;
    auto rng = make_rng(0, 0xe1);
    double p_in = 0.0, p_out = 0.0;
    for (int d = 0; d < draws; ++d) {
        CVector z(N);
        for (Eigen::Index n = 0; n < N; ++n) z(n) = draw(sig.symbols[static_cast<std::size_t>(n)], rng);
        for (Eigen::Index m = 0; m < sig.antennas(); ++m) {
            const CVector x = sig.weights.row(m).transpose().cwiseProduct(z);
            const auto y = detail::antenna_waveform(x, samples);
            for (double v : y) {
                const double o = apply(model, v);
                p_in += v * v;
                p_out += o * o;
            }
        }
    }
    if (p_in == 0.0) return 1.0;
    return p_out / (r.gain * r.gain * p_in);
}

/// Peak-to-average power ratio in dB of the worst antenna. The passband peak is
/// sqrt(2) times the envelope peak, found on a dense grid of the envelope.
inline double papr(const SignalSpec& sig) {
    if (!sig.deterministic_only()) throw RandomSignalError("papr: stochastic signal; use a Monte Carlo percentile");
    const Eigen::Index N = sig.tones();
    const std::size_t samples = 1024 * static_cast<std::size_t>(std::max<Eigen::Index>(N, 1));
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m < sig.antennas(); ++m) {
        CVector x(N);
        for (Eigen::Index n = 0; n < N; ++n)
            x(n) = sig.weights(m, n) * std::sqrt(average_power(sig.symbols[static_cast<std::size_t>(n)]));
        const double avg = x.squaredNorm();
        if (avg == 0.0) continue;
        double peak = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            cplx e = 0.0;
            for (Eigen::Index n = 0; n < N; ++n)
                e += x(n) * std::polar(1.0, kTwoPi * static_cast<double>((static_cast<std::size_t>(n) * s) % samples) /
                                                static_cast<double>(samples));
            peak = std::max(peak, 2.0 * std::norm(e));
        }
        worst = std::max(worst, 10.0 * std::log10(peak / avg));
    }
    if (!std::isfinite(worst)) throw DomainError("papr: zero signal has undefined PAPR");
    return worst;
}

}  // namespace wptlab
