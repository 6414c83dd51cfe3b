#pragma once

// Wireless-powered mobile edge computing: local CPU-frequency control under energy
// causality, offloading time split, and mode selection.

#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace wptlab {

struct MecScenario {
    double deadline = 1.0;       // s
    std::vector<double> tail;    // Pr(X >= k), k = 1..N
    double gamma = 1e-28;        // J s^2 (effective capacitance)
    double p_dc = 1e-3;          // W harvested
    double bits = 1e4;           // L
    double bandwidth = 1e6;      // Hz
    double gain = 1e-6;          // channel power gain
    double noise = 1e-13;        // W

    std::size_t cycles() const { return tail.size(); }
    double noise_over_gain() const { return noise / gain; }

    void validate() const {
        if (tail.empty()) throw ConfigError("mec.tail: at least one cycle required");
        if (std::abs(tail.front() - 1.0) > 1e-12) throw ConfigError("mec.tail: p_1 must equal 1");
        for (std::size_t k = 0; k < tail.size(); ++k) {
            if (!(tail[k] >= 0.0) || !std::isfinite(tail[k])) throw ConfigError("mec.tail: probabilities must be >= 0");
            if (k > 0 && tail[k] > tail[k - 1]) throw ConfigError("mec.tail: must be nonincreasing (p_k >= p_{k+1})");
        }
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("mec.") + name + ": must be > 0");
        };
        positive(deadline, "deadline");
        positive(gamma, "gamma");
        positive(p_dc, "p_dc");
        positive(bits, "bits");
        positive(bandwidth, "bandwidth");
        positive(gain, "gain");
        positive(noise, "noise");
    }
};

enum class MecMode { Local, Offload, Infeasible };

inline const char* mec_mode_name(MecMode m) {
    switch (m) {
        case MecMode::Local: return "local";
        case MecMode::Offload: return "offload";
        default: return "infeasible";
    }
}

struct MecPolicy {
    MecMode mode = MecMode::Infeasible;
    std::vector<double> frequencies;  // Hz, local mode
    double offload_time = 0.0;        // s, offload mode
    double energy = 0.0;              // J spent (expected CPU energy or transmit energy)
    double energy_savings = 0.0;      // J
    double multiplier = 0.0;          // lambda of the energy-harvesting constraint
    std::string regime;
};

struct LocalThresholds {
    double a = 0.0;
    double a_prime = 0.0;
};

inline LocalThresholds local_regime_thresholds(const MecScenario& sc) {
    sc.validate();
    const double n = static_cast<double>(sc.cycles());
    const double t3 = std::pow(sc.deadline, 3);
    double s13 = 0.0, s23 = 0.0;
    for (double p : sc.tail) {
        if (p <= 0.0) {
            // A cycle that never runs: its frequency is unbounded and a' is infinite.
            s23 = std::numeric_limits<double>::infinity();
            continue;
        }
        s13 += std::cbrt(p);
        s23 += std::pow(p, -2.0 / 3.0);
    }
    return {sc.gamma * n * n * n / t3, sc.gamma / t3 * s13 * s13 * s23};
}

/// f_k = [(1/T) sum_m (p_m + lambda)^{1/3}] (p_k + lambda)^{-1/3}
inline std::vector<double> frequencies_for_multiplier(const MecScenario& sc, double lambda) {
    double s = 0.0;
    for (double p : sc.tail) s += std::cbrt(p + lambda);
    std::vector<double> f;
    f.reserve(sc.tail.size());
    for (double p : sc.tail) f.push_back(s / sc.deadline / std::cbrt(p + lambda));
    return f;
}

inline double expected_cpu_energy(const MecScenario& sc, const std::vector<double>& f) {
    double e = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) e += sc.gamma * sc.tail[k] * f[k] * f[k];
    return e;
}

/// Largest normalised violation of the prefix energy-causality constraints
/// sum_{k<=m} gamma f_k^2 <= P_dc sum_{k<=m} 1/f_k.
inline double causality_violation(const MecScenario& sc, const std::vector<double>& f) {
    double used = 0.0, time = 0.0, worst = -std::numeric_limits<double>::infinity();
    for (double fk : f) {
        used += sc.gamma * fk * fk;
        time += 1.0 / fk;
        worst = std::max(worst, (used - sc.p_dc * time) / (sc.p_dc * sc.deadline));
    }
    return worst;
}

/// Log-barrier Newton method on the convex reformulation y_k = 1/f_k (scaled by T),
/// used to confirm the multiplier form when the energy-causality structure is not the
/// single total constraint.
inline std::vector<double> optimize_local_numeric(const MecScenario& sc) {
    const Eigen::Index n = static_cast<Eigen::Index>(sc.cycles());
    const double rho = sc.p_dc * std::pow(sc.deadline, 3) / sc.gamma;  // >= N^3 when feasible
    Eigen::VectorXd p(n);
    for (Eigen::Index k = 0; k < n; ++k) p(k) = std::max(sc.tail[static_cast<std::size_t>(k)], 1e-300);
    // Strictly feasible start: uniform z slightly below 1/N.
    const double nn = static_cast<double>(n);
    const double margin = std::cbrt(nn * nn * nn / rho);  // < 1 when strictly feasible
    if (!(margin < 1.0)) throw InfeasibleError("optimize_local_numeric: no strictly feasible point");
    Eigen::VectorXd z = Eigen::VectorXd::Constant(n, (1.0 + margin) / 2.0 / nn);

    auto barrier = [&](const Eigen::VectorXd& x, double t, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
        double f = 0.0;
        if (g) g->setZero(n);
        if (H) H->setZero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (x(k) <= 0.0) return std::numeric_limits<double>::infinity();
            f += t * p(k) / (x(k) * x(k)) - std::log(x(k));
            if (g) (*g)(k) += -2.0 * t * p(k) / std::pow(x(k), 3) - 1.0 / x(k);
            if (H) (*H)(k, k) += 6.0 * t * p(k) / std::pow(x(k), 4) + 1.0 / (x(k) * x(k));
        }
        const double slack_d = 1.0 - x.sum();
        if (slack_d <= 0.0) return std::numeric_limits<double>::infinity();
        f -= std::log(slack_d);
        if (g) *g += Eigen::VectorXd::Constant(n, 1.0 / slack_d);
        if (H) *H += Eigen::MatrixXd::Constant(n, n, 1.0 / (slack_d * slack_d));
        double used = 0.0, time = 0.0;
        for (Eigen::Index m = 0; m < n; ++m) {
            used += 1.0 / (x(m) * x(m));
            time += x(m);
            const double s = rho * time - used;
            if (s <= 0.0) return std::numeric_limits<double>::infinity();
            f -= std::log(s);
            if (g || H) {
                Eigen::VectorXd ds = Eigen::VectorXd::Zero(n);
                for (Eigen::Index k = 0; k <= m; ++k) ds(k) = rho + 2.0 / std::pow(x(k), 3);
                if (g) *g -= ds / s;
                if (H) {
                    *H += ds * ds.transpose() / (s * s);
                    for (Eigen::Index k = 0; k <= m; ++k) (*H)(k, k) += 6.0 / std::pow(x(k), 4) / s;
                }
            }
        }
        return f;
    };

    const double m_constraints = 2.0 * nn + 1.0;
    for (double t = 1.0; m_constraints / t > 1e-13; t *= 8.0) {
        for (int it = 0; it < 200; ++it) {
            Eigen::VectorXd g;
            Eigen::MatrixXd H;
            const double f0 = barrier(z, t, &g, &H);
            const Eigen::VectorXd step = -H.ldlt().solve(g);
            const double dec = -g.dot(step);
            if (dec / 2.0 <= 1e-14) break;
            double s = 1.0;
            while (s > 1e-20) {
                const Eigen::VectorXd cand = z + s * step;
                const double fc = barrier(cand, t, nullptr, nullptr);
                if (std::isfinite(fc) && fc <= f0 - 0.25 * s * dec) break;
                s *= 0.5;
            }
            if (s <= 1e-20) break;
            z += s * step;
        }
    }
    std::vector<double> f(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) f[static_cast<std::size_t>(k)] = 1.0 / (z(k) * sc.deadline);
    return f;
}

/// Minimum expected CPU energy subject to the deadline and energy causality.
inline MecPolicy optimize_local(const MecScenario& sc) {
    sc.validate();
    const LocalThresholds th = local_regime_thresholds(sc);
    MecPolicy pol;
    if (sc.p_dc < th.a) {
        pol.mode = MecMode::Infeasible;
        pol.regime = "low";
        return pol;
    }
    pol.mode = MecMode::Local;
    if (sc.p_dc >= th.a_prime) {
        pol.regime = "high";
        pol.frequencies = frequencies_for_multiplier(sc, 0.0);
    } else {
        pol.regime = "medium";
        auto viol = [&](double lam) { return causality_violation(sc, frequencies_for_multiplier(sc, lam)); };
        double hi = 1.0;
        while (viol(hi) > 0.0 && hi < 1e300) hi *= 2.0;
        if (viol(hi) > 0.0) {
            // Only the uniform schedule (lambda -> infinity) is feasible.
            pol.frequencies.assign(sc.cycles(), static_cast<double>(sc.cycles()) / sc.deadline);
            pol.multiplier = std::numeric_limits<double>::infinity();
        } else {
            double lo = 0.0;
            for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (viol(mid) > 0.0 ? lo : hi) = mid;
            }
            pol.multiplier = hi;
            pol.frequencies = frequencies_for_multiplier(sc, hi);
        }
        // The multiplier form is optimal when only the total constraint binds; confirm
        // against the barrier solver and keep whichever is cheaper and feasible.
        try {
            const auto alt = optimize_local_numeric(sc);
            if (causality_violation(sc, alt) <= 1e-9 &&
                expected_cpu_energy(sc, alt) < expected_cpu_energy(sc, pol.frequencies) * (1.0 - 1e-3))
                pol.frequencies = alt;
        } catch (const InfeasibleError&) {
        }
    }
    pol.energy = expected_cpu_energy(sc, pol.frequencies);
    pol.energy_savings = sc.p_dc * sc.deadline - pol.energy;
    return pol;
}

/// Energy savings of offloading for duration t: P T + (s - P) t - s t 2^{L/(W t)},
/// s = noise/gain.
inline double offload_savings(const MecScenario& sc, double t) {
    const double s = sc.noise_over_gain();
    return sc.p_dc * sc.deadline + (s - sc.p_dc) * t - s * t * std::exp2(sc.bits / (sc.bandwidth * t));
}

/// Minimum harvested power for which offloading can save energy before the deadline.
inline double offload_threshold(const MecScenario& sc) {
    sc.validate();
    const double c = sc.bits * kLn2 / (sc.bandwidth * sc.deadline);
    const double w = lambert_w0(-std::exp(-1.0 - c));
    return sc.noise_over_gain() * (1.0 + (c + w) * std::exp(c + w + 1.0));
}

/// t* = L ln2 / (W [1 + W0(P/(s e) - 1/e)]) with s = noise/gain.
inline double optimal_offload_time(const MecScenario& sc) {
    const double s = sc.noise_over_gain();
    const double w = lambert_w0(sc.p_dc / (s * kE) - 1.0 / kE);
    return sc.bits * kLn2 / (sc.bandwidth * (1.0 + w));
}

inline MecPolicy optimize_offload(const MecScenario& sc) {
    sc.validate();
    MecPolicy pol;
    pol.regime = sc.p_dc >= offload_threshold(sc) ? "sufficient" : "low";
    const double t = optimal_offload_time(sc);
    pol.offload_time = t;
    if (!(t < sc.deadline) || pol.regime == "low") {
        pol.mode = MecMode::Infeasible;
        return pol;
    }
    pol.energy_savings = offload_savings(sc, t);
    if (pol.energy_savings < 0.0) {
        pol.mode = MecMode::Infeasible;
        return pol;
    }
    pol.mode = MecMode::Offload;
    pol.energy = sc.p_dc * (sc.deadline - t) - pol.energy_savings;
    return pol;
}

/// Runs both designs and keeps the feasible one with the larger energy savings.
inline MecPolicy select_mode(const MecScenario& sc) {
    const MecPolicy local = optimize_local(sc);
    const MecPolicy off = optimize_offload(sc);
    const bool lf = local.mode == MecMode::Local;
    const bool of = off.mode == MecMode::Offload;
    if (lf && of) return off.energy_savings > local.energy_savings ? off : local;
    if (lf) return local;
    if (of) return off;
    MecPolicy none;
    none.regime = "infeasible";
    return none;
}

}  // namespace wptlab
