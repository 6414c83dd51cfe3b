#include <wptlab/mec.hpp>

#include <gtest/gtest.h>

#include "problem_oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace wptlab;

namespace {

std::vector<double> random_tail(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.2, 1.0);
    std::vector<double> t{1.0};
    while (t.size() < n) t.push_back(t.back() * ud(rng));
    return t;
}

}  // namespace

TEST(Thresholds, HolderOrdering) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 1000; ++t) {
        MecScenario sc;
        sc.tail = random_tail(1 + t % 12, rng);
        const auto th = local_regime_thresholds(sc);
        EXPECT_LE(th.a, th.a_prime * (1.0 + 1e-12));
    }
}

TEST(Thresholds, DeterministicWorkloadCollapses) {
    MecScenario sc;
    sc.tail.assign(5, 1.0);
    const auto th = local_regime_thresholds(sc);
    EXPECT_NEAR(th.a / th.a_prime, 1.0, 1e-12);
    EXPECT_NEAR(th.a, sc.gamma * 125.0, 1e-40);
}

TEST(Local, HighRegimeUsesWholeDeadline) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        MecScenario sc;
        sc.tail = random_tail(2 + t % 6, rng);
        sc.p_dc = 2.0 * local_regime_thresholds(sc).a_prime;
        const auto pol = optimize_local(sc);
        ASSERT_EQ(pol.regime, "high");
        long double time = 0.0L;
        for (double f : pol.frequencies) time += 1.0L / f;
        EXPECT_NEAR(static_cast<double>(time), sc.deadline, 1e-12 * sc.deadline);
        // f_k p_k^{1/3} is constant.
        for (std::size_t k = 1; k < pol.frequencies.size(); ++k)
            EXPECT_NEAR(pol.frequencies[k] * std::cbrt(sc.tail[k]) / (pol.frequencies[0] * std::cbrt(sc.tail[0])), 1.0, 1e-12);
        EXPECT_LE(causality_violation(sc, pol.frequencies), 1e-12);
    }
}

TEST(Local, LowRegimeInfeasible) {
    MecScenario sc;
    sc.tail = {1.0, 0.5, 0.2};
    sc.p_dc = 0.5 * local_regime_thresholds(sc).a;
    EXPECT_EQ(optimize_local(sc).mode, MecMode::Infeasible);
}

TEST(Local, MediumRegimeMatchesNumericOracle) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(0.05, 0.95);
    for (int t = 0; t < 12; ++t) {
        MecScenario sc;
        sc.tail = random_tail(2 + t % 5, rng);
        const auto th = local_regime_thresholds(sc);
        sc.p_dc = th.a + ud(rng) * (th.a_prime - th.a);
        const auto pol = optimize_local(sc);
        ASSERT_EQ(pol.regime, "medium");
        EXPECT_LE(causality_violation(sc, pol.frequencies), 1e-9);
        const double rho = sc.p_dc * std::pow(sc.deadline, 3) / sc.gamma;
        const double oracle_e = oracle::local_cpu_energy(sc.tail, rho) * sc.gamma / (sc.deadline * sc.deadline);
        EXPECT_NEAR(pol.energy / oracle_e, 1.0, 1e-3) << "trial " << t;
    }
}

TEST(Offload, ClosedFormTimeMatchesStationaryPoint) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        MecScenario sc;
        sc.tail = {1.0};
        sc.deadline = 0.1 + ud(rng);
        sc.gain = 1e-6;
        sc.noise = 1e-13;
        sc.bits = sc.bandwidth * sc.deadline * (0.001 + 0.3 * ud(rng));
        sc.p_dc = sc.noise_over_gain() * std::pow(10.0, 0.3 + 3.0 * ud(rng));
        const long double s = sc.noise_over_gain(), P = sc.p_dc, c = sc.bits / sc.bandwidth * std::log(2.0L);
        // Savings derivative (s - P) - s 2^{L/Wt} (1 - c/t); concave savings, so bisect its sign.
        auto deriv = [&](long double x) { return (s - P) - s * std::exp(c / x) * (1.0L - c / x); };
        long double lo = 1e-6L * c, hi = 1e6L * c;
        for (int it = 0; it < 400; ++it) {
            const long double mid = std::sqrt(lo * hi);
            (deriv(mid) > 0.0L ? lo : hi) = mid;
        }
        EXPECT_NEAR(optimal_offload_time(sc), static_cast<double>(lo), 1e-8 * sc.deadline);
    }
}

TEST(Offload, ThresholdSeparatesFeasibility) {
    MecScenario sc;
    sc.tail = {1.0};
    sc.bits = 2e5;
    const double th = offload_threshold(sc);
    sc.p_dc = 1.01 * th;
    EXPECT_EQ(optimize_offload(sc).mode, MecMode::Offload);
    EXPECT_GE(optimize_offload(sc).energy_savings, 0.0);
    sc.p_dc = 0.99 * th;
    EXPECT_EQ(optimize_offload(sc).mode, MecMode::Infeasible);
}

TEST(Offload, ThresholdIsZeroSavingsPower) {
    MecScenario sc;
    sc.tail = {1.0};
    sc.bits = 1e5;
    sc.p_dc = offload_threshold(sc);
    // At the threshold the best achievable savings are zero.
    const double t = std::min(optimal_offload_time(sc), sc.deadline);
    EXPECT_NEAR(offload_savings(sc, t) / (sc.p_dc * sc.deadline), 0.0, 1e-9);
}

TEST(SelectMode, PicksLargerSavings) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        MecScenario sc;
        sc.tail = random_tail(3, rng);
        sc.gamma = 1e-20;
        sc.p_dc = std::pow(10.0, -6.0 + 4.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        const auto l = optimize_local(sc), o = optimize_offload(sc), m = select_mode(sc);
        double best = -1.0;
        if (l.mode == MecMode::Local) best = std::max(best, l.energy_savings);
        if (o.mode == MecMode::Offload) best = std::max(best, o.energy_savings);
        if (best < 0.0)
            EXPECT_EQ(m.mode, MecMode::Infeasible);
        else
            EXPECT_EQ(m.energy_savings, best);
    }
}

TEST(Scenario, Validation) {
    MecScenario sc;
    EXPECT_THROW(sc.validate(), ConfigError);
    sc.tail = {0.9};
    EXPECT_THROW(sc.validate(), ConfigError);
    sc.tail = {1.0, 0.5, 0.7};
    EXPECT_THROW(sc.validate(), ConfigError);
    sc.tail = {1.0};
    sc.bits = -1.0;
    EXPECT_THROW(sc.validate(), ConfigError);
}
