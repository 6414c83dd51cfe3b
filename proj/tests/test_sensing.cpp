#include <wptlab/sensing.hpp>

#include <gtest/gtest.h>

#include "problem_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace wptlab;

namespace {

SensingScenario canonical() {
    SensingScenario sc;
    Sensor a, b, c;
    b.utility_weight = 2.0;
    b.gain = 5e-3;
    c.utility_scale = 5e-5;
    c.gain = 2e-2;
    c.compression = 3.0;
    sc.sensors = {a, b, c};
    return sc;
}

void expect_feasible(const SensingScenario& sc, const SensingPolicy& pol) {
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& a = pol.sensors[n];
        const Sensor& s = sc.sensors[n];
        EXPECT_GE(sc.round - a.bits * sc.beta(n) - a.time, -1e-9);
        const double spent = sc.xi(n) * a.bits + sc.transmit_energy(n, a.bits / s.compression, a.time);
        EXPECT_GE(sc.e3 * s.gain * a.power * sc.wpt_time - spent, -1e-9);
    }
    EXPECT_LE(pol.total_power(), sc.power * (1.0 + 1e-9));
}

}  // namespace

TEST(Priority, HandEvaluation) {
    const auto sc = canonical();
    // Sensor 0: C(2) = e^4 - e^2, q_c = 1e-28 * 1e18 = 1e-10.
    const double cc = std::exp(4.0) - std::exp(2.0);
    const double denom = 2e-8 + 1e-10 * cc + 1e-13 * std::log(2.0) / (1e-2 * 1e6 * 2.0);
    EXPECT_NEAR(priority(sc, 0), 1.0 * 1e-4 * 0.5 * 1e-2 / denom - 0.1, 1e-12);
}

TEST(Priority, Monotonicity) {
    auto sc = canonical();
    const double before = priority(sc, 0);
    sc.sensors[0].utility_weight *= 2.0;
    EXPECT_GT(priority(sc, 0), before);
    sc.price = 1e9;
    EXPECT_LT(priority(sc, 0), 0.0);
}

TEST(Compression, NoCompressionNoCycles) {
    const auto sc = canonical();
    EXPECT_EQ(sc.compression_cycles(1.0), 0.0);
    EXPECT_GT(sc.compression_cycles(1.5), 0.0);
}

TEST(Subproblem, VanishingUtilityScale) {
    auto sc = canonical();
    sc.sensors[0].utility_scale = 1e-30;
    const auto a = per_sensor_subproblem(sc, 0, 0.0);
    EXPECT_FALSE(a.scheduled);
    EXPECT_EQ(a.bits, 0.0);
    EXPECT_EQ(a.power, 0.0);
}

TEST(Subproblem, MatchesTwoDimensionalGrid) {
    const auto sc = canonical();
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto a = per_sensor_subproblem(sc, n, 0.0);
        const double got = sc.sensors[n].utility_weight * std::log1p(sc.sensors[n].utility_scale * a.bits) -
                           sc.price * a.power * sc.wpt_time;
        double best = 0.0;
        for (const auto& c : oracle::sensing_candidates(sc, n, 200)) best = std::max(best, c.utility);
        EXPECT_GE(got, best - 0.01 * std::abs(best));
    }
}

TEST(Optimize, CanonicalMatchesBruteForce) {
    for (double power : {1.0, 1e-2, 1e-3}) {
        auto sc = canonical();
        sc.power = power;
        const auto pol = optimize_sensing(sc);
        const double grid = oracle::sensing_brute_force(sc, 60);
        EXPECT_GE(pol.reward, grid - 0.02 * std::abs(grid)) << "P = " << power;
        expect_feasible(sc, pol);
        for (std::size_t n = 0; n < sc.size(); ++n)
            EXPECT_EQ(pol.sensors[n].scheduled, pol.sensors[n].priority >= pol.multiplier) << "sensor " << n;
    }
}

TEST(Optimize, SlackPowerHasZeroMultiplier) {
    auto sc = canonical();
    sc.power = 1e6;
    const auto pol = optimize_sensing(sc);
    EXPECT_EQ(pol.multiplier, 0.0);
    for (std::size_t n = 0; n < sc.size(); ++n) EXPECT_EQ(pol.sensors[n].scheduled, priority(sc, n) > 0.0);
}

TEST(Optimize, BindingBudgetIsTight) {
    auto sc = canonical();
    sc.power = 1e-3;
    const auto pol = optimize_sensing(sc);
    EXPECT_GT(pol.multiplier, 0.0);
    EXPECT_NEAR(pol.total_power() / sc.power, 1.0, 1e-6);
}

TEST(Optimize, IdenticalSensorsGetIdenticalAllocations) {
    SensingScenario sc;
    sc.sensors = {Sensor{}, Sensor{}};
    sc.power = 1e-3;
    const auto pol = optimize_sensing(sc);
    EXPECT_NEAR(pol.sensors[0].power, pol.sensors[1].power, 1e-9);
    EXPECT_NEAR(pol.sensors[0].bits / pol.sensors[1].bits, 1.0, 1e-9);
}

TEST(Optimize, LowerPriceEnlargesSchedule) {
    auto sc = canonical();
    sc.power = 1e-3;
    std::size_t prev = 0;
    for (double price : {0.5, 0.3, 0.1, 0.01}) {
        sc.price = price;
        std::size_t count = 0;
        try {
            for (const auto& a : optimize_sensing(sc).sensors) count += a.scheduled;
        } catch (const DegenerateError&) {
        }
        EXPECT_GE(count, prev);
        prev = count;
    }
}

TEST(Optimize, NoSchedulableSensor) {
    auto sc = canonical();
    sc.price = 1e9;
    EXPECT_THROW(optimize_sensing(sc), DegenerateError);
}

TEST(Reward, EmptyAndWastedPower) {
    const auto sc = canonical();
    SensingPolicy empty;
    empty.sensors.resize(3);
    EXPECT_EQ(reward(sc, empty), 0.0);
    empty.sensors[0].power = 1.0;
    EXPECT_LT(reward(sc, empty), 0.0);
}

TEST(Reward, RejectsInfeasiblePolicy) {
    const auto sc = canonical();
    SensingPolicy p;
    p.sensors.resize(3);
    p.sensors[0].bits = 1e9;
    p.sensors[0].time = 0.5;
    EXPECT_THROW(reward(sc, p), InfeasibleError);
}

TEST(Compression, JointOptimisationNeverWorse) {
    auto sc = canonical();
    sc.power = 1e-3;
    const double fixed = optimize_sensing(sc).reward;
    const auto [tuned, pol] = optimize_sensing_with_compression(sc);
    EXPECT_GE(pol.reward, fixed);
    expect_feasible(tuned, pol);
}
