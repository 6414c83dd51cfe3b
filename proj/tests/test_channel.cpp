#include <wptlab/channel.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wptlab;

TEST(Multipath, SinglePathUnitGain) {
    MultipathProfile p{{0.0}, {1.0}, {}};
    const auto ch = response_from_multipath(p, ToneGrid::uniform(4), 2, 1);
    for (const auto& h : ch.h)
        for (Eigen::Index m = 0; m < 2; ++m) EXPECT_NEAR(std::abs(h(0, m) - cplx(1.0, 0.0)), 0.0, 1e-15);
}

TEST(Multipath, SinglePathWithPhase) {
    const double phi = 0.7;
    MultipathProfile p{{0.0}, {0.3}, std::vector<double>(3, phi)};
    const auto ch = response_from_multipath(p, ToneGrid::uniform(3), 1, 1);
    for (const auto& h : ch.h) EXPECT_NEAR(std::abs(h(0, 0) - std::polar(0.3, phi)), 0.0, 1e-15);
}

TEST(Multipath, MatchesDirectSummation) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const ToneGrid grid = ToneGrid::uniform(4, 2.4e9, 1e6);
    MultipathProfile p;
    p.delays = {20e-9, 170e-9};
    p.gains = {0.8, 0.25};
    const Eigen::Index M = 2, Q = 1;
    for (int i = 0; i < 2 * 4 * 2; ++i) p.phases.push_back(kTwoPi * ud(rng));
    const auto ch = response_from_multipath(p, grid, M, Q);
    for (int n = 0; n < 4; ++n)
        for (Eigen::Index m = 0; m < M; ++m) {
            // Direct evaluation in long double.
            std::complex<long double> acc = 0.0L;
            for (std::size_t l = 0; l < 2; ++l) {
                const long double f = 2.4e9L + n * 1e6L;
                const long double ph = -2.0L * 3.14159265358979323846264338327950288L * f * p.delays[l] +
                                       p.phases[(static_cast<std::size_t>(m) * 4 + static_cast<std::size_t>(n)) * 2 + l];
                acc += static_cast<long double>(p.gains[l]) * std::complex<long double>(std::cos(ph), std::sin(ph));
            }
            const cplx ref(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
            EXPECT_NEAR(std::abs(ch.h[static_cast<std::size_t>(n)](0, m) - ref), 0.0, 1e-12);
        }
}

TEST(Multipath, LinearInGains) {
    MultipathProfile p{{0.0, 50e-9}, {0.5, 0.2}, {}};
    const auto a = response_from_multipath(p, ToneGrid::uniform(3), 2, 2);
    for (auto& g : p.gains) g *= 2.0;
    const auto b = response_from_multipath(p, ToneGrid::uniform(3), 2, 2);
    for (int n = 0; n < 3; ++n) EXPECT_LT((b.h[static_cast<std::size_t>(n)] - 2.0 * a.h[static_cast<std::size_t>(n)]).norm(), 1e-15);
}

TEST(Multipath, FlatProfileIsFrequencyFlat) {
    MultipathProfile p{{0.0}, {0.9}, {}};
    const auto ch = response_from_multipath(p, ToneGrid::uniform(5), 3, 1);
    for (const auto& h : ch.h) EXPECT_LT((h - ch.h.front()).norm(), 1e-15);
}

TEST(Multipath, RejectsWideDelaySpread) {
    MultipathProfile p{{0.0, 2e-6}, {1.0, 1.0}, {}};
    EXPECT_THROW(response_from_multipath(p, ToneGrid::uniform(2), 1, 1), NarrowbandError);
}

TEST(Rayleigh, UnitAveragePower) {
    const auto ch = rayleigh_iid(1000, 1, ToneGrid::uniform(100), 9);
    double s = 0.0;
    for (const auto& h : ch.h) s += h.squaredNorm();
    EXPECT_NEAR(s / 1e5, 1.0, 0.02);
}

TEST(Rayleigh, Deterministic) {
    const auto a = rayleigh_iid(3, 2, ToneGrid::uniform(2), 42);
    const auto b = rayleigh_iid(3, 2, ToneGrid::uniform(2), 42);
    for (std::size_t n = 0; n < 2; ++n) EXPECT_EQ(a.h[n], b.h[n]);
    const auto s = rayleigh_iid(1, 1, ToneGrid::uniform(1), 1);
    EXPECT_EQ(s.h.size(), 1u);
    EXPECT_EQ(s.h.front().size(), 1);
}

TEST(Hardening, Examples) {
    ChannelResponse ones;
    ones.grid = ToneGrid::uniform(1);
    ones.h.push_back(CMatrix::Ones(1, 4));
    EXPECT_DOUBLE_EQ(hardening_statistic(ones).front(), 1.0);
    ones.h.front().setZero();
    EXPECT_EQ(hardening_statistic(ones).front(), 0.0);
}

TEST(Hardening, LargeArray) {
    int inside = 0;
    for (int t = 0; t < 200; ++t) {
        const double r = hardening_statistic(rayleigh_iid(4096, 1, ToneGrid::uniform(1), 1000 + t)).front();
        inside += (r >= 0.95 && r <= 1.05);
    }
    EXPECT_GE(inside, 190);
}

TEST(Grid, Validation) {
    ToneGrid g = ToneGrid::uniform(2);
    g.bandwidth_fw = 2.0 * g.delta_f;
    EXPECT_THROW(g.validate(), DomainError);
    g = ToneGrid::uniform(0);
    EXPECT_THROW(g.validate(), DomainError);
}
