#pragma once

// Reference solvers for the resource-allocation problems, written from the problem
// statements with brute force or generic minimisers.

#include "oracles.hpp"

#include <wptlab/sensing.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

/// Normalised local problem: z_k = 1/(f_k T), sum z = 1, minimise sum p_k / z_k^2
/// with prefix causality sum_{k<=m} 1/z_k^2 <= rho sum_{k<=m} z_k. Softmax
/// parametrisation, log barrier with decreasing weight, Nelder-Mead inner solves.
inline double local_cpu_energy(const std::vector<double>& tail, double rho) {
    const std::size_t n = tail.size();
    auto z_of = [&](const std::vector<double>& u) {
        std::vector<double> z(n);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += (z[k] = std::exp(k == 0 ? 0.0 : u[k - 1]));
        for (double& v : z) v /= s;
        return z;
    };
    auto energy = [&](const std::vector<double>& z) {
        double e = 0.0;
        for (std::size_t k = 0; k < n; ++k) e += tail[k] / (z[k] * z[k]);
        return e;
    };
    auto slacks = [&](const std::vector<double>& z) {
        std::vector<double> s;
        double used = 0.0, time = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            used += 1.0 / (z[k] * z[k]);
            time += z[k];
            s.push_back((rho * time - used) / rho);
        }
        return s;
    };
    std::vector<double> u(n - 1, 0.0);  // uniform start: feasible because rho > n^3
    const double e0 = energy(z_of(u));
    for (double mu = 1e-2; mu > 1e-9; mu *= 0.1) {
        auto f = [&](const std::vector<double>& v) {
            const auto z = z_of(v);
            double b = 0.0;
            for (double s : slacks(z)) {
                if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
                b -= std::log(s);
            }
            return energy(z) / e0 + mu * b;
        };
        for (int restart = 0; restart < 3; ++restart) u = oracle::nelder_mead(f, u, 0.05, 2000);
    }
    return energy(z_of(u));
}

using wptlab::SensingScenario;
using wptlab::Sensor;

struct Candidate {
    double power;
    double utility;
};

/// Per-sensor candidates on a (t, l) grid, energy balance tight, from first principles.
inline std::vector<Candidate> sensing_candidates(const SensingScenario& sc, std::size_t n, int steps) {
    const Sensor& s = sc.sensors[n];
    const double cc = s.compression == 1.0 ? 0.0 : std::exp(sc.epsilon * s.compression) - std::exp(sc.epsilon);
    const double beta = 1.0 / s.sensing_rate + cc / s.cpu_freq;
    const double xi = s.reward_cost + s.sensing_cost + s.capacitance * s.cpu_freq * s.cpu_freq * cc;
    std::vector<Candidate> out{{0.0, 0.0}};
    for (int i = 1; i < steps; ++i) {
        const double t = sc.round * i / steps;
        for (int j = 1; j <= steps; ++j) {
            const double l = (sc.round - t) / beta * j / steps;
            const double tx = t / s.gain * sc.noise * (std::pow(2.0, l / s.compression / (sc.bandwidth * t)) - 1.0);
            const double p = (xi * l + tx) / (sc.e3 * s.gain * sc.wpt_time);
            out.push_back({p, s.utility_weight * std::log(1.0 + s.utility_scale * l) - sc.price * p * sc.wpt_time});
        }
    }
    // Keep the power/utility Pareto front, sorted by power.
    std::sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) { return x.power < y.power; });
    std::vector<Candidate> front;
    for (const auto& c : out)
        if (front.empty() || c.utility > front.back().utility) front.push_back(c);
    return front;
}

inline double sensing_brute_force(const SensingScenario& sc, int steps) {
    std::vector<std::vector<Candidate>> cands;
    for (std::size_t n = 0; n < sc.size(); ++n) cands.push_back(sensing_candidates(sc, n, steps));
    double best = 0.0;
    for (const auto& a : cands[0])
        for (const auto& b : cands[1]) {
            const double left = sc.power - a.power - b.power;
            if (left < 0.0) continue;
            const auto it = std::upper_bound(cands[2].begin(), cands[2].end(), left,
                                             [](double v, const Candidate& c) { return v < c.power; });
            best = std::max(best, a.utility + b.utility + std::prev(it)->utility);
        }
    return best;
}

}  // namespace oracle
