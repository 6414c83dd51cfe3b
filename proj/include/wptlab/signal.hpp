#pragma once

// Input distributions and the transmit-signal description shared by the harvester,
// amplifier and optimiser modules.

#include "wptlab/errors.hpp"
#include "wptlab/types.hpp"

#include <cmath>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace wptlab {

namespace dist {

/// Unmodulated carrier of power `power`.
struct Cw {
    double power = 1.0;
};
/// Circularly-symmetric complex Gaussian.
struct Cscg {
    double power = 1.0;
};
/// All power in the real dimension, zero mean.
struct RealGaussian {
    double power = 1.0;
};
/// Independent real/imaginary Gaussians: Re ~ N(mean_r, var_r), Im ~ N(mean_i, var_i).
struct AsymGaussian {
    double var_r = 0.5;
    double var_i = 0.5;
    double mean_r = 0.0;
    double mean_i = 0.0;
};
/// Flash signalling: amplitude 0 w.p. 1 - 1/l^2, amplitude l*sqrt(P) w.p. 1/l^2, uniform phase.
struct OnOff {
    double l = 1.0;
    double power = 1.0;
};
/// Time sharing: CSCG(P) for a fraction p_ts of the time, OnOff(l, P) otherwise.
struct Mixture {
    double p_ts = 0.5;
    double l = 2.0;
    double power = 1.0;
};
/// Finite constellation with a probability per point.
struct Constellation {
    std::vector<cplx> points;
    std::vector<double> probs;
};

}  // namespace dist

using InputDistribution = std::variant<dist::Cw, dist::Cscg, dist::RealGaussian, dist::AsymGaussian,
                                       dist::OnOff, dist::Mixture, dist::Constellation>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Raw moments E[X^k], k = 0..6, of X ~ N(mu, var).
inline std::array<double, 7> normal_raw_moments(double mu, double var) {
    const double m2 = mu * mu;
    return {1.0,
            mu,
            m2 + var,
            mu * (m2 + 3.0 * var),
            m2 * m2 + 6.0 * m2 * var + 3.0 * var * var,
            mu * (m2 * m2 + 10.0 * m2 * var + 15.0 * var * var),
            m2 * m2 * m2 + 15.0 * m2 * m2 * var + 45.0 * m2 * var * var + 15.0 * var * var * var};
}

}  // namespace detail

inline std::string name_of(const InputDistribution& d) {
    return std::visit(detail::overloaded{[](const dist::Cw&) { return std::string("cw"); },
                                         [](const dist::Cscg&) { return std::string("cscg"); },
                                         [](const dist::RealGaussian&) { return std::string("real_gaussian"); },
                                         [](const dist::AsymGaussian&) { return std::string("asym_gaussian"); },
                                         [](const dist::OnOff&) { return std::string("on_off"); },
                                         [](const dist::Mixture&) { return std::string("mixture"); },
                                         [](const dist::Constellation&) { return std::string("constellation"); }},
                      d);
}

inline bool is_deterministic(const InputDistribution& d) { return std::holds_alternative<dist::Cw>(d); }

inline void validate(const InputDistribution& d) {
    std::visit(detail::overloaded{
                   [](const dist::Cw& c) {
                       if (!(c.power >= 0.0)) throw DomainError("cw: power must be >= 0");
                   },
                   [](const dist::Cscg& c) {
                       if (!(c.power >= 0.0)) throw DomainError("cscg: power must be >= 0");
                   },
                   [](const dist::RealGaussian& c) {
                       if (!(c.power >= 0.0)) throw DomainError("real_gaussian: power must be >= 0");
                   },
                   [](const dist::AsymGaussian& c) {
                       if (!(c.var_r >= 0.0) || !(c.var_i >= 0.0))
                           throw DomainError("asym_gaussian: variances must be >= 0");
                   },
                   [](const dist::OnOff& c) {
                       if (!(c.l >= 1.0)) throw DomainError("on_off: l must be >= 1");
                       if (!(c.power >= 0.0)) throw DomainError("on_off: power must be >= 0");
                   },
                   [](const dist::Mixture& c) {
                       if (!(c.p_ts >= 0.0 && c.p_ts <= 1.0)) throw DomainError("mixture: p_ts must be in [0,1]");
                       if (!(c.l >= 1.0)) throw DomainError("mixture: l must be >= 1");
                   },
                   [](const dist::Constellation& c) {
                       if (c.points.empty() || c.points.size() != c.probs.size())
                           throw DomainError("constellation: points/probs size mismatch");
                       double s = 0.0;
                       for (double p : c.probs) {
                           if (p < 0.0) throw DomainError("constellation: negative probability");
                           s += p;
                       }
                       if (std::abs(s - 1.0) > 1e-9) throw DomainError("constellation: probabilities must sum to 1");
                   }},
               d);
}

/// E|x|^order for order in {2, 4, 6}.
inline double abs_moment(const InputDistribution& d, int order) {
    if (order != 2 && order != 4 && order != 6) throw OrderError("abs_moment: order must be 2, 4 or 6");
    const int k = order / 2;
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    return std::visit(
        detail::overloaded{
            [&](const dist::Cw& c) { return std::pow(c.power, k); },
            // |x|^2 ~ Exp(P): E|x|^{2k} = k! P^k
            [&](const dist::Cscg& c) { return fact(k) * std::pow(c.power, k); },
            // E x^{2k} = (2k-1)!! P^k
            [&](const dist::RealGaussian& c) {
                const double df = (k == 1) ? 1.0 : (k == 2) ? 3.0 : 15.0;
                return df * std::pow(c.power, k);
            },
            [&](const dist::AsymGaussian& c) {
                const auto a = detail::normal_raw_moments(c.mean_r, c.var_r);
                const auto b = detail::normal_raw_moments(c.mean_i, c.var_i);
                // E (A^2 + B^2)^k by the binomial expansion.
                double s = 0.0;
                double binom = 1.0;
                for (int j = 0; j <= k; ++j) {
                    s += binom * a[static_cast<std::size_t>(2 * j)] * b[static_cast<std::size_t>(2 * (k - j))];
                    binom = binom * (k - j) / (j + 1);
                }
                return s;
            },
            [&](const dist::OnOff& c) { return std::pow(c.l, 2 * k - 2) * std::pow(c.power, k); },
            [&](const dist::Mixture& c) {
                return c.p_ts * fact(k) * std::pow(c.power, k) +
                       (1.0 - c.p_ts) * std::pow(c.l, 2 * k - 2) * std::pow(c.power, k);
            },
            [&](const dist::Constellation& c) {
                double s = 0.0;
                for (std::size_t i = 0; i < c.points.size(); ++i) s += c.probs[i] * std::pow(std::norm(c.points[i]), k);
                return s;
            }},
        d);
}

inline double average_power(const InputDistribution& d) { return abs_moment(d, 2); }

/// One random draw of the complex symbol.
template <class Rng>
cplx draw(const InputDistribution& d, Rng& rng) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    return std::visit(
        detail::overloaded{
            [&](const dist::Cw& c) { return cplx(std::sqrt(c.power), 0.0); },
            [&](const dist::Cscg& c) {
                const double s = std::sqrt(c.power / 2.0);
                const double re = nd(rng);
                const double im = nd(rng);
                return cplx(s * re, s * im);
            },
            [&](const dist::RealGaussian& c) { return cplx(std::sqrt(c.power) * nd(rng), 0.0); },
            [&](const dist::AsymGaussian& c) {
                const double re = c.mean_r + std::sqrt(c.var_r) * nd(rng);
                const double im = c.mean_i + std::sqrt(c.var_i) * nd(rng);
                return cplx(re, im);
            },
            [&](const dist::OnOff& c) {
                const double u = ud(rng);
                const double ph = kTwoPi * ud(rng);
                if (u >= 1.0 / (c.l * c.l)) return cplx(0.0, 0.0);
                return std::polar(c.l * std::sqrt(c.power), ph);
            },
            [&](const dist::Mixture& c) {
                if (ud(rng) < c.p_ts) {
                    const double s = std::sqrt(c.power / 2.0);
                    const double re = nd(rng);
                    const double im = nd(rng);
                    return cplx(s * re, s * im);
                }
                const double u = ud(rng);
                const double ph = kTwoPi * ud(rng);
                if (u >= 1.0 / (c.l * c.l)) return cplx(0.0, 0.0);
                return std::polar(c.l * std::sqrt(c.power), ph);
            },
            [&](const dist::Constellation& c) {
                double u = ud(rng);
                for (std::size_t i = 0; i < c.points.size(); ++i) {
                    if (u < c.probs[i]) return c.points[i];
                    u -= c.probs[i];
                }
                return c.points.back();
            }},
        d);
}

/// Transmit signal: on subband n antenna m sends weights(m, n) * z_n, where z_n is
/// drawn from symbols[n] (shared across antennas). A deterministic multisine uses
/// Cw{1} symbols so the weights are the complex amplitudes x_{m,n} themselves.
struct SignalSpec {
    CMatrix weights;                          // M x N
    std::vector<InputDistribution> symbols;   // size N
    double budget = 0.0;                      // power budget P (W)

    static SignalSpec deterministic(CMatrix x, double budget) {
        SignalSpec s;
        s.symbols.assign(static_cast<std::size_t>(x.cols()), dist::Cw{1.0});
        s.weights = std::move(x);
        s.budget = budget;
        return s;
    }

    Eigen::Index antennas() const { return weights.rows(); }
    Eigen::Index tones() const { return weights.cols(); }

    bool deterministic_only() const {
        for (const auto& d : symbols)
            if (!is_deterministic(d)) return false;
        return true;
    }

    double total_power() const {
        double p = 0.0;
        for (Eigen::Index n = 0; n < weights.cols(); ++n)
            p += weights.col(n).squaredNorm() * average_power(symbols[static_cast<std::size_t>(n)]);
        return p;
    }

    void validate() const {
        if (static_cast<Eigen::Index>(symbols.size()) != weights.cols())
            throw DimensionError("SignalSpec: one symbol distribution per subband required");
        if (!weights.allFinite()) throw NonFiniteError("SignalSpec: non-finite weights");
        for (const auto& d : symbols) wptlab::validate(d);
        if (total_power() > budget + 1e-12) throw DomainError("SignalSpec: power budget exceeded");
    }
};

}  // namespace wptlab
