#include <wptlab/combining.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace wptlab;

namespace {

CMatrix random_h(Eigen::Index Q, Eigen::Index M, std::mt19937_64& rng, double scale = 0.03) {
    CMatrix h(Q, M);
    for (Eigen::Index q = 0; q < Q; ++q) h.row(q) = scale * oracle::random_cvector(M, rng).transpose();
    return h;
}

double single_branch_pdc(const EhTaylorModel& m, cplx c) {
    CVector v(1);
    v(0) = c;
    return harvest(m, ReceivedSignal::multisine(v)).p_dc;
}

}  // namespace

TEST(DcCombine, SingleBranchEqualsHarvest) {
    std::mt19937_64 rng(1);
    const EhTaylorModel m;
    const CMatrix h = random_h(1, 3, rng);
    const CVector w = oracle::random_cvector(3, rng, 0.1);
    EXPECT_NEAR(dc_combine_harvest(m, narrowband_channel(h), w).p_dc / single_branch_pdc(m, (h * w)(0)), 1.0, 1e-12);
}

TEST(DcCombine, IdenticalRowsScaleWithQ) {
    std::mt19937_64 rng(2);
    const EhTaylorModel m;
    const CMatrix row = random_h(1, 2, rng);
    CMatrix h(3, 2);
    h << row, row, row;
    const CVector w = oracle::random_cvector(2, rng, 0.1);
    EXPECT_NEAR(dc_combine_harvest(m, narrowband_channel(h), w).p_dc / single_branch_pdc(m, (row * w)(0)), 3.0, 1e-12);
}

TEST(DcCombine, MatchesPerBranchSampler) {
    std::mt19937_64 rng(3);
    const EhTaylorModel m;
    const CMatrix h = random_h(2, 2, rng);
    const CVector w = oracle::random_cvector(2, rng, 0.1);
    const auto ch = narrowband_channel(h);
    const auto branches = monte_carlo_harvest_branches(m, SignalSpec::deterministic(w, w.squaredNorm()), ch, 1, 0);
    double sum = 0.0;
    for (const auto& b : branches) sum += b.p_dc;
    EXPECT_NEAR(dc_combine_harvest(m, ch, w).p_dc / sum, 1.0, 1e-9);
}

TEST(DcOptimize, SingleBranchIsMrt) {
    std::mt19937_64 rng(4);
    const CMatrix h = random_h(1, 4, rng);
    const auto r = optimize_dc_combining(EhTaylorModel{}, narrowband_channel(h), 0.1);
    const double align = std::abs((h * r.w_t)(0)) / (h.norm() * r.w_t.norm());
    EXPECT_GE(align, 1.0 - 1e-9);
}

TEST(DcOptimize, RankOneIsMrtToDominantDirection) {
    std::mt19937_64 rng(5);
    const CVector u = oracle::random_cvector(2, rng);
    const CVector v = oracle::random_cvector(3, rng);
    const CMatrix h = 0.02 * u * v.adjoint();
    const auto r = optimize_dc_combining(EhTaylorModel{}, narrowband_channel(h), 0.1);
    EXPECT_GE(std::abs(v.dot(r.w_t)) / (v.norm() * r.w_t.norm()), 1.0 - 1e-9);
}

TEST(DcOptimize, MatchesDirectionGrid) {
    std::mt19937_64 rng(6);
    const EhTaylorModel m;
    const double p = 0.1;
    for (int t = 0; t < 5; ++t) {
        const CMatrix h = random_h(2, 2, rng);
        const auto ch = narrowband_channel(h);
        const double got = optimize_dc_combining(m, ch, p).report.p_dc;
        // w = sqrt(P) (cos a, sin a e^{j b}); 100 x 100 directions.
        double best = 0.0;
        for (int i = 0; i < 100; ++i)
            for (int j = 0; j < 100; ++j) {
                const double a = 0.5 * kPi * i / 99.0, b = kTwoPi * j / 100.0;
                CVector w(2);
                w << std::sqrt(p) * std::cos(a), std::sqrt(p) * std::sin(a) * std::polar(1.0, b);
                best = std::max(best, dc_combine_harvest(m, ch, w).p_dc);
            }
        EXPECT_GE(got, best * (1.0 - 1e-3));
    }
}

TEST(RfOptimize, SingleBranch) {
    std::mt19937_64 rng(7);
    const CMatrix h = random_h(1, 3, rng);
    const auto r = optimize_rf_combining(EhTaylorModel{}, narrowband_channel(h), 0.1);
    EXPECT_NEAR(std::abs(r.combiner.w_r(0)), 1.0, 1e-15);
    EXPECT_NEAR(std::norm((r.combiner.w_r.adjoint() * h * r.w_t)(0)), 0.1 * h.squaredNorm(), 1e-14);
}

TEST(RfOptimize, MatchesPhaseGrid) {
    std::mt19937_64 rng(8);
    const double p = 0.1;
    for (int t = 0; t < 10; ++t) {
        const CMatrix h = random_h(2, 3, rng);
        const auto r = optimize_rf_combining(EhTaylorModel{}, narrowband_channel(h), p);
        const double got = std::norm((r.combiner.w_r.adjoint() * h * r.w_t)(0));
        double best = 0.0;
        for (int i = 0; i < 1024; ++i) {
            CVector w(2);
            w << 1.0 / std::sqrt(2.0), std::polar(1.0 / std::sqrt(2.0), kTwoPi * i / 1024.0);
            best = std::max(best, p * (w.adjoint() * h).squaredNorm());
        }
        EXPECT_GE(got, best * (1.0 - 1e-4));
    }
}

TEST(RfOptimize, IdenticalRowsGiveEqualPhases) {
    std::mt19937_64 rng(9);
    const CMatrix row = random_h(1, 2, rng);
    CMatrix h(3, 2);
    h << row, row, row;
    const auto r = optimize_rf_combining(EhTaylorModel{}, narrowband_channel(h), 0.1);
    for (Eigen::Index q = 1; q < 3; ++q) EXPECT_NEAR(std::abs(r.combiner.w_r(q) - r.combiner.w_r(0)), 0.0, 1e-9);
}

TEST(RfOptimize, MonotoneAndFeasible) {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 10; ++t) {
        const CMatrix h = random_h(4, 2, rng);
        SolverConfig cfg;
        cfg.restarts = 0;
        const auto r = optimize_rf_combining(EhTaylorModel{}, narrowband_channel(h), 0.1, cfg);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
            EXPECT_GE(r.objective_trace[i], r.objective_trace[i - 1] * (1.0 - 1e-12));
        EXPECT_LE(r.combiner.w_r.squaredNorm(), 1.0 + 1e-12);
        for (Eigen::Index q = 0; q < 4; ++q) EXPECT_NEAR(std::abs(r.combiner.w_r(q)), 0.5, 1e-15);
    }
}

TEST(RfUnconstrained, DominatesDcCombining) {
    std::mt19937_64 rng(11);
    const EhTaylorModel m;
    for (int t = 0; t < 20; ++t) {
        const CMatrix h = random_h(2 + 2 * (t % 2), 2, rng);
        const auto ch = narrowband_channel(h);
        EXPECT_GE(unconstrained_rf_combining(m, ch, 0.1).report.p_dc, optimize_dc_combining(m, ch, 0.1).report.p_dc * (1.0 - 1e-9));
    }
}

TEST(Combining, RequiresSingleTone) {
    auto ch = rayleigh_iid(2, 2, ToneGrid::uniform(2), 1);
    EXPECT_THROW(optimize_rf_combining(EhTaylorModel{}, ch, 1.0), ShapeError);
    EXPECT_THROW(optimize_dc_combining(EhTaylorModel{}, ch, 1.0), ShapeError);
}
