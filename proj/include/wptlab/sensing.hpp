#pragma once

// Wireless-powered mobile crowd sensing: per-sensor sensing/compression/upload energy,
// operator reward and threshold-based power allocation.

#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace wptlab {

struct Sensor {
    double utility_weight = 1.0;   // a_n
    double utility_scale = 1e-4;   // b_n, 1/bit
    double gain = 1e-2;            // g_n
    double sensing_rate = 1e5;     // s_n, bits/s
    double sensing_cost = 1e-8;    // q_s, J/bit
    double reward_cost = 1e-8;     // q_r, J/bit
    double cpu_freq = 1e9;         // Hz
    double capacitance = 1e-28;    // gamma_n, J s^2
    double compression = 2.0;      // R_n
};

struct SensingScenario {
    std::vector<Sensor> sensors;
    double round = 1.0;         // T, s
    double wpt_time = 1.0;      // T_0, s
    double power = 1.0;         // P, W
    double bandwidth = 1e6;     // W, Hz
    double noise = 1e-13;       // sigma^2, W
    double e3 = 0.5;
    double price = 0.1;         // c, utility per J
    double epsilon = 2.0;       // compression exponent
    double max_compression = 4.0;

    std::size_t size() const { return sensors.size(); }

    void validate() const {
        if (sensors.empty()) throw ConfigError("sensing.sensors: at least one sensor required");
        auto positive = [](double v, const std::string& name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("sensing." + name + ": must be > 0");
        };
        positive(round, "round");
        positive(wpt_time, "wpt_time");
        positive(power, "power");
        positive(bandwidth, "bandwidth");
        positive(noise, "noise");
        positive(e3, "e3");
        positive(epsilon, "epsilon");
        if (!(price >= 0.0)) throw ConfigError("sensing.price: must be >= 0");
        if (!(max_compression >= 1.0)) throw ConfigError("sensing.max_compression: must be >= 1");
        for (std::size_t n = 0; n < sensors.size(); ++n) {
            const Sensor& s = sensors[n];
            const std::string p = "sensing.sensors[" + std::to_string(n) + "].";
            positive(s.utility_weight, p + "utility_weight");
            positive(s.utility_scale, p + "utility_scale");
            positive(s.gain, p + "gain");
            positive(s.sensing_rate, p + "sensing_rate");
            positive(s.cpu_freq, p + "cpu_freq");
            positive(s.capacitance, p + "capacitance");
            if (!(s.sensing_cost >= 0.0)) throw ConfigError(p + "sensing_cost: must be >= 0");
            if (!(s.reward_cost >= 0.0)) throw ConfigError(p + "reward_cost: must be >= 0");
            if (!(s.compression >= 1.0) || s.compression > max_compression)
                throw ConfigError(p + "compression: must lie in [1, max_compression]");
        }
    }

    /// Cycles per bit of compression, e^{eps R} - e^{eps}.
    double compression_cycles(double r) const { return r == 1.0 ? 0.0 : std::exp(epsilon * r) - std::exp(epsilon); }
    double cycle_energy(std::size_t n) const {
        const Sensor& s = sensors[n];
        return s.capacitance * s.cpu_freq * s.cpu_freq;
    }
    /// Seconds per sensed bit (sensing plus compression).
    double beta(std::size_t n) const {
        const Sensor& s = sensors[n];
        return 1.0 / s.sensing_rate + compression_cycles(s.compression) / s.cpu_freq;
    }
    /// Joules per sensed bit excluding transmission.
    double xi(std::size_t n) const {
        const Sensor& s = sensors[n];
        return s.reward_cost + s.sensing_cost + cycle_energy(n) * compression_cycles(s.compression);
    }
    /// Transmit energy for `bits` sent over `t` seconds: (t/g) sigma^2 (2^{bits/(W t)} - 1).
    double transmit_energy(std::size_t n, double bits, double t) const {
        if (bits <= 0.0) return 0.0;
        if (t <= 0.0) return std::numeric_limits<double>::infinity();
        return t / sensors[n].gain * noise * std::expm1(bits / (bandwidth * t) * kLn2);
    }
};

struct SensorAllocation {
    double power = 0.0;  // W
    double bits = 0.0;   // sensed bits
    double time = 0.0;   // s transmitting
    bool scheduled = false;
    double priority = 0.0;
};

struct SensingPolicy {
    std::vector<SensorAllocation> sensors;
    double multiplier = 0.0;
    double reward = 0.0;
    double total_power() const {
        double p = 0.0;
        for (const auto& s : sensors) p += s.power;
        return p;
    }
};

/// phi_n = a_n b_n e3 g_n / (xi_n + sigma^2 ln2/(g_n W R_n)) - c: the marginal
/// utility per unit energy of the first sensed bit, net of the energy price.
inline double priority(const SensingScenario& sc, std::size_t n) {
    const Sensor& s = sc.sensors.at(n);
    const double denom = sc.xi(n) + sc.noise * kLn2 / (s.gain * sc.bandwidth * s.compression);
    return s.utility_weight * s.utility_scale * sc.e3 * s.gain / denom - sc.price;
}

/// Power the BS must allocate so the sensor harvests exactly its spent energy.
inline double required_power(const SensingScenario& sc, std::size_t n, double bits, double t) {
    const Sensor& s = sc.sensors[n];
    const double spent = sc.xi(n) * bits + sc.transmit_energy(n, bits / s.compression, t);
    return spent / (sc.e3 * s.gain * sc.wpt_time);
}

/// Best (t, l, P) for one sensor at energy price c + lambda with the time budget
/// tight (l = (T - t)/beta). The objective is concave in t.
inline SensorAllocation per_sensor_subproblem(const SensingScenario& sc, std::size_t n, double lambda) {
    const Sensor& s = sc.sensors.at(n);
    const double beta = sc.beta(n);
    const double T = sc.round;
    auto alloc_at = [&](double t) {
        SensorAllocation a;
        a.time = t;
        a.bits = std::max(0.0, (T - t) / beta);
        a.power = required_power(sc, n, a.bits, t);
        return a;
    };
    auto objective = [&](double t) {
        const SensorAllocation a = alloc_at(t);
        return s.utility_weight * std::log1p(s.utility_scale * a.bits) - (sc.price + lambda) * a.power * sc.wpt_time;
    };
    SensorAllocation none;
    none.priority = priority(sc, n);
    if (none.priority <= lambda) return none;
    const auto g = golden_section_max<double>(objective, 0.0, T, T * 1e-13);
    if (!(g.value > 0.0)) return none;
    SensorAllocation best = alloc_at(g.x);
    best.scheduled = best.bits > 0.0;
    best.priority = none.priority;
    return best;
}

inline double reward(const SensingScenario& sc, const SensingPolicy& pol) {
    if (pol.sensors.size() != sc.size()) throw DimensionError("reward: one allocation per sensor");
    double r = 0.0;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& a = pol.sensors[n];
        const Sensor& s = sc.sensors[n];
        if (a.bits * sc.beta(n) + a.time > sc.round * (1.0 + 1e-9))
            throw InfeasibleError("reward: sensor " + std::to_string(n) + " exceeds the round duration");
        const double spent = sc.xi(n) * a.bits + sc.transmit_energy(n, a.bits / s.compression, a.time);
        const double harvested = sc.e3 * s.gain * a.power * sc.wpt_time;
        if (spent > harvested + 1e-9) throw InfeasibleError("reward: sensor " + std::to_string(n) + " spends more than it harvests");
        r += s.utility_weight * std::log1p(s.utility_scale * a.bits) - sc.price * a.power * sc.wpt_time;
    }
    return r;
}

/// Bisection on the power multiplier: lambda* = 0 when the unconstrained allocation
/// fits the budget, otherwise the smallest lambda whose allocation fits.
inline SensingPolicy optimize_sensing(const SensingScenario& sc, const SolverConfig& cfg = {}) {
    sc.validate();
    auto solve = [&](double lambda) {
        SensingPolicy p;
        p.multiplier = lambda;
        for (std::size_t n = 0; n < sc.size(); ++n) p.sensors.push_back(per_sensor_subproblem(sc, n, lambda));
        return p;
    };
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < sc.size(); ++n) top = std::max(top, priority(sc, n));
    if (!(top > 0.0)) throw DegenerateError("optimize_sensing: no sensor has positive priority");

    SensingPolicy pol = solve(0.0);
    if (pol.total_power() > sc.power) {
        double lo = 0.0, hi = top;
        for (int it = 0; it < 200 && hi - lo > cfg.rel_tol * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (solve(mid).total_power() > sc.power ? lo : hi) = mid;
        }
        pol = solve(hi);
    }
    pol.reward = reward(sc, pol);
    return pol;
}

/// Alternates the power/sensing solve with coordinate descent on each R_n over a
/// 32-point grid in [1, R_max]; two sweeps. Returns the best scenario/policy seen.
inline std::pair<SensingScenario, SensingPolicy> optimize_sensing_with_compression(SensingScenario sc,
                                                                                   const SolverConfig& cfg = {}) {
    sc.validate();
    auto score = [&](const SensingScenario& s) {
        try {
            return optimize_sensing(s, cfg);
        } catch (const DegenerateError&) {
            SensingPolicy p;
            p.sensors.resize(s.size());
            return p;
        }
    };
    SensingPolicy best = score(sc);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t n = 0; n < sc.size(); ++n) {
            double best_r = sc.sensors[n].compression;
            for (int i = 0; i < 32; ++i) {
                SensingScenario trial = sc;
                trial.sensors[n].compression = 1.0 + (sc.max_compression - 1.0) * i / 31.0;
                const SensingPolicy p = score(trial);
                if (p.reward > best.reward) {
                    best = p;
                    best_r = trial.sensors[n].compression;
                }
            }
            sc.sensors[n].compression = best_r;
        }
    }
    return {sc, best};
}

}  // namespace wptlab
