#include <wptlab/hpa.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace wptlab;

TEST(Rapp, LinearRegime) {
    const HpaModel m = hpa::Rapp{1.0, 1e-3, 1.0};
    EXPECT_NEAR(apply(m, 1e-6) / 1e-6, 1.0, 1e-6);
}

TEST(Rapp, SaturatesAtAs) {
    const HpaModel m = hpa::Rapp{1.0, 1e-3, 10.0};
    EXPECT_NEAR(apply(m, 1e3), 1e-3, 1e-15);
    EXPECT_NEAR(apply(m, -1e3), -1e-3, 1e-15);
    EXPECT_TRUE(std::isfinite(apply(m, 1e300)));
}

TEST(Rapp, MonotoneAndBounded) {
    const hpa::Rapp r{2.0, 1e-3, 3.0};
    double prev = 0.0;
    for (double x = 0.0; x < 1e-2; x += 1e-6) {
        const double y = rapp_magnitude(r, x);
        EXPECT_GE(y, prev);
        EXPECT_LE(y, r.a_s);
        prev = y;
    }
}

TEST(Rapp, ApproachesLinear) {
    const double peak = 1e-3;
    const HpaModel m = hpa::Rapp{1.5, 1e6 * peak, 2.0};
    for (double x = -peak; x <= peak; x += peak / 50.0) {
        if (x != 0.0) {
            EXPECT_LT(std::abs(apply(m, x) / (1.5 * x) - 1.0), 1e-6);
        }
    }
}

TEST(Rapp, DerivativeMatchesDifference) {
    const hpa::Rapp r{1.0, 1e-3, 4.0};
    for (double x : {1e-5, 5e-4, 1e-3, 3e-3}) {
        const double h = x * 1e-6;
        const double fd = (rapp_magnitude(r, x + h) - rapp_magnitude(r, x - h)) / (2.0 * h);
        EXPECT_NEAR(rapp_derivative(r, x), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Linear, Gain) {
    const HpaModel m = hpa::Linear{2.0, 1.0};
    EXPECT_DOUBLE_EQ(apply(m, 0.5), 1.0);
}

TEST(Validation, RejectsBadParameters) {
    EXPECT_THROW(validate(HpaModel{hpa::Rapp{1.0, 0.0, 1.0}}), DomainError);
    EXPECT_THROW(validate(HpaModel{hpa::Rapp{1.0, 1e-3, 0.5}}), DomainError);
    EXPECT_THROW(validate(HpaModel{hpa::Linear{1.0, 1.5}}), DomainError);
}

namespace {

SignalSpec tones(int n, double amp) {
    CMatrix x = CMatrix::Constant(1, n, cplx(amp, 0.0));
    return SignalSpec::deterministic(x, n * amp * amp);
}

}  // namespace

TEST(E1, LinearReportsConstant) { EXPECT_DOUBLE_EQ(e1_report(hpa::Linear{1.0, 1.0}, tones(2, 1e-3)), 1.0); }

TEST(E1, RappDeepLinear) {
    EXPECT_NEAR(e1_report(hpa::Rapp{1.0, 1.0, 2.0}, tones(2, 1e-4)), 1.0, 1e-3);
}

TEST(E1, RappSaturatedLosesPower) {
    const double a_s = 1e-3;
    // Single tone peak sqrt(2)*amp = 10 A_s.
    EXPECT_LT(e1_report(hpa::Rapp{1.0, a_s, 2.0}, tones(1, 10.0 * a_s / std::sqrt(2.0))), 1.0);
}

TEST(Papr, SingleTone) { EXPECT_NEAR(papr(tones(1, 0.1)), 10.0 * std::log10(2.0), 1e-9); }

TEST(Papr, InPhaseTones) {
    for (int n : {2, 4, 8}) EXPECT_NEAR(papr(tones(n, 0.1)), 10.0 * std::log10(2.0 * n), 1e-6) << n;
}

TEST(Papr, ZeroSignalThrows) { EXPECT_THROW(papr(tones(2, 0.0)), DomainError); }

TEST(Papr, StochasticSignalRejected) {
    SignalSpec s = tones(1, 1.0);
    s.symbols[0] = dist::Cscg{1.0};
    EXPECT_THROW(papr(s), RandomSignalError);
}
