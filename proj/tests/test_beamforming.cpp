#include <wptlab/beamforming.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace wptlab;

TEST(Mrt, SingleAntenna) {
    const cplx h = std::polar(0.4, 1.2);
    const auto bf = mrt(siso_channel(std::vector<cplx>{h}), {2.0});
    EXPECT_NEAR(std::abs(bf.w[0](0) - std::sqrt(2.0) * std::polar(1.0, -1.2)), 0.0, 1e-15);
}

TEST(Mrt, ReceivedPower) {
    std::mt19937_64 rng(1);
    auto ch = rayleigh_iid(4, 1, ToneGrid::uniform(3), 7);
    const std::vector<double> p{0.2, 0.5, 0.3};
    const auto bf = mrt(ch, p);
    double rx = 0.0, expect = 0.0;
    for (int n = 0; n < 3; ++n) {
        rx += std::norm((ch.h[static_cast<std::size_t>(n)].row(0) * bf.w[static_cast<std::size_t>(n)])(0));
        expect += p[static_cast<std::size_t>(n)] * ch.h[static_cast<std::size_t>(n)].row(0).squaredNorm();
    }
    EXPECT_NEAR(rx / expect, 1.0, 1e-14);
    EXPECT_NEAR(bf.power(), 1.0, 1e-15);
}

TEST(Mrt, RealChannelGivesRealWeights) {
    CMatrix h(1, 3);
    h << 0.2, 0.5, 0.1;
    const auto bf = mrt(narrowband_channel(h), {1.0});
    for (Eigen::Index m = 0; m < 3; ++m) {
        EXPECT_EQ(bf.w[0](m).imag(), -0.0);
        EXPECT_GT(bf.w[0](m).real(), 0.0);
    }
}

TEST(Mrt, ZeroChannelRejected) {
    EXPECT_THROW(mrt(narrowband_channel(CMatrix::Zero(1, 2)), {1.0}), ZeroChannelError);
}

TEST(Mrt, MaximisesPerToneAmplitude) {
    std::mt19937_64 rng(12);
    const CVector h = oracle::random_cvector(4, rng);
    for (int t = 0; t < 100; ++t) {
        CVector u = oracle::random_cvector(4, rng);
        u.normalize();
        EXPECT_LE(std::abs((h.transpose() * u).value()), h.norm() + 1e-12);
    }
}

TEST(Joint, SingleAntennaEqualsAllocation) {
    const std::vector<cplx> g{cplx(0.02, 0.01), cplx(0.01, -0.02), cplx(0.03, 0.0)};
    const auto ch = siso_channel(g);
    const EhTaylorModel m;
    const auto a = joint_bf_waveform(ch, m, 0.1);
    const auto b = optimize_allocation(ch, m, 0.1);
    EXPECT_NEAR(vout_of(m, a, ch), vout_of(m, b, ch), 1e-15);
}

TEST(Joint, LargeArrayReducesToFlatChannel) {
    auto ch = rayleigh_iid(4096, 1, ToneGrid::uniform(4), 5);
    // Normalise every tone to the same norm so that ||h_n|| is flat.
    for (auto& h : ch.h) h *= 0.3 / h.norm();
    const EhTaylorModel m;
    const double p = 1e-3;
    const auto s = joint_bf_waveform(ch, m, p);
    const auto flat = siso_channel(std::vector<cplx>(4, cplx(0.3, 0.0)));
    const auto ref = optimize_allocation(flat, m, p);
    for (Eigen::Index n = 0; n < 4; ++n)
        EXPECT_NEAR(s.weights.col(n).squaredNorm() / std::norm(ref.weights(0, n)), 1.0, 1e-4);
    // Uniform power stays close to optimal in objective.
    const double v_uni = vout_of(m, uniform_allocation(flat, p), flat);
    EXPECT_GE(v_uni / vout_of(m, s, ch), 0.9);
}

TEST(Joint, BeatsMrtUniform) {
    auto ch = rayleigh_iid(3, 1, ToneGrid::uniform(5), 8);
    for (auto& h : ch.h) h *= 0.05;
    const EhTaylorModel m;
    const double p = 0.1;
    std::vector<double> uni(5, p / 5.0);
    const auto base = SignalSpec::deterministic(mrt(ch, uni).as_matrix(), p);
    EXPECT_GE(vout_of(m, joint_bf_waveform(ch, m, p), ch), vout_of(m, base, ch) * (1.0 - 1e-12));
}

TEST(Diversity, SecondMomentUnchanged) {
    const EhTaylorModel m;
    const auto r = transmit_diversity_eval(m, 2, 2000, 8, 1e-3, 3);
    EXPECT_LT(std::abs(r.mean_m2_td - r.mean_m2_single), 4.0 * r.stderr_m2_diff);
}

TEST(Diversity, LinearModelSeesNoGain) {
    EhTaylorModel m;
    m.n_o = 2;
    const auto r = transmit_diversity_eval(m, 2, 2000, 8, 1e-3, 4);
    EXPECT_LT(std::abs(r.mean_vout_td - r.mean_vout_single), 4.0 * std::hypot(r.stderr_td, r.stderr_single));
}

TEST(Diversity, LineOfSightGain) {
    const EhTaylorModel m;
    const auto r = transmit_diversity_eval(m, 2, 2000, 16, 1e-3, 5, Fading::Rician, 10.0);
    EXPECT_GT(r.mean_vout_td, r.mean_vout_single);
    EXPECT_GT(bootstrap_mean_diff_lower(r.vout_td, r.vout_single, 0.99, 2000, 1), 0.0);
}

TEST(Diversity, SignalIgnoresChannel) {
    // Same seed, different fading law: the per-slot phases are drawn identically,
    // so the phase stream does not depend on h.
    const EhTaylorModel m;
    const auto a = transmit_diversity_eval(m, 2, 1, 1, 1e-3, 9, Fading::Rayleigh);
    const auto b = transmit_diversity_eval(m, 2, 1, 1, 1e-3, 9, Fading::Rician, 0.0);
    EXPECT_DOUBLE_EQ(a.vout_td[0], b.vout_td[0]);
}

TEST(Diversity, Validation) {
    EXPECT_THROW(transmit_diversity_eval(EhTaylorModel{}, 1, 10, 1, 1.0, 0), DomainError);
    EXPECT_THROW(transmit_diversity_eval(EhTaylorModel{}, 2, 0, 1, 1.0, 0), DomainError);
}
