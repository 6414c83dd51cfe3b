#include <wptlab/numerics.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>
#include <numeric>

using namespace wptlab;

TEST(LambertW, KnownValues) {
    EXPECT_EQ(lambert_w0(0.0), 0.0);
    EXPECT_NEAR(lambert_w0(kE), 1.0, 1e-14);
    const double w = lambert_w0(1.0);
    EXPECT_NEAR(w * std::exp(w), 1.0, 1e-12);
    EXPECT_NEAR(lambert_w0(-1.0 / kE), -1.0, 1e-7);
}

TEST(LambertW, ResidualOverRange) {
    for (double x = -1.0 / kE + 1e-6; x < 1e6; x = x < 0.0 ? x + 0.01 : x * 1.07 + 1e-3) {
        const double w = lambert_w0(x);
        EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-10 * std::max(1.0, std::abs(x))) << "x = " << x;
        EXPECT_GE(w, -1.0);
    }
}

TEST(LambertW, RejectsBelowBranchPoint) {
    EXPECT_THROW(lambert_w0(-0.5), DomainError);
    EXPECT_THROW(lambert_w0(std::nan("")), DomainError);
}

TEST(Bisect, Examples) {
    EXPECT_NEAR(bisect([](double x) { return x - 1.0; }, 0.0, 2.0), 1.0, 1e-12);
    const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    EXPECT_NEAR(r * r - 2.0, 0.0, 1e-10);
    EXPECT_NEAR(bisect([](double x) { return x; }, -1.0, 1.0), 0.0, 1e-15);
}

TEST(Bisect, SameSignThrows) {
    EXPECT_THROW(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), BracketError);
}

TEST(GoldenSection, FindsParabolaPeak) {
    const auto g = golden_section_max<double>([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-12);
    EXPECT_NEAR(g.x, 0.3, 1e-8);
}

TEST(ProjectedGradient, LinearObjectiveSaturatesBudget) {
    GradObjective f = [](std::span<const double> x, std::span<double> g) {
        std::fill(g.begin(), g.end(), 1.0);
        return std::accumulate(x.begin(), x.end(), 0.0);
    };
    const auto r = projected_gradient_max(f, 3, 1.0);
    EXPECT_NEAR(r.value, 1.0, 1e-9);
    EXPECT_NEAR(std::accumulate(r.x.begin(), r.x.end(), 0.0), 1.0, 1e-9);
}

TEST(ProjectedGradient, InteriorOptimum) {
    GradObjective f = [](std::span<const double> x, std::span<double> g) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v -= (x[i] - 0.2) * (x[i] - 0.2);
            g[i] = -2.0 * (x[i] - 0.2);
        }
        return v;
    };
    const auto r = projected_gradient_max(f, 2, 1.0);
    EXPECT_NEAR(r.x[0], 0.2, 1e-6);
    EXPECT_NEAR(r.x[1], 0.2, 1e-6);
}

TEST(ProjectedGradient, FourthOrderSurrogateMatchesGrid) {
    // Two aligned tones, power on the simplex: v(p) = b2 sum p A^2 + 1.5 b4 sum_k C_k^2.
    const double a0 = 1.0, a1 = 0.6, b2 = 1.0, b4 = 40.0;
    auto v = [&](double p0, double p1) {
        return oracle::aligned_vout(b2, b4, {std::sqrt(std::max(p0, 0.0)) * a0, std::sqrt(std::max(p1, 0.0)) * a1});
    };
    GradObjective f = [&](std::span<const double> x, std::span<double> g) {
        const double h = 1e-7;
        g[0] = (v(x[0] + h, x[1]) - v(std::max(x[0] - h, 0.0), x[1])) / (x[0] + h - std::max(x[0] - h, 0.0));
        g[1] = (v(x[0], x[1] + h) - v(x[0], std::max(x[1] - h, 0.0))) / (x[1] + h - std::max(x[1] - h, 0.0));
        return v(x[0], x[1]);
    };
    const auto r = projected_gradient_max(f, 2, 1.0);
    double best = 0.0;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; i + j <= 200; ++j) best = std::max(best, v(i / 200.0, j / 200.0));
    EXPECT_GE(r.value, best * (1.0 - 1e-4));
}

TEST(ProjectedGradient, AlwaysFeasible) {
    GradObjective f = [](std::span<const double> x, std::span<double> g) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v += (i + 1.0) * x[i] - x[i] * x[i] * x[i];
            g[i] = (i + 1.0) - 3.0 * x[i] * x[i];
        }
        return v;
    };
    for (double budget : {0.1, 1.0, 10.0}) {
        const auto r = projected_gradient_max(f, 5, budget);
        double s = 0.0;
        for (double x : r.x) {
            EXPECT_GE(x, -1e-15);
            s += x;
        }
        EXPECT_LE(s, budget + 1e-12);
    }
}

TEST(TimeAverage, CosineMoments) {
    auto y = [](double t) { return std::sqrt(2.0) * std::cos(kTwoPi * t); };
    const Moments m = time_average(y, 1.0, 64, 6);
    EXPECT_NEAR(m[2], 1.0, 1e-12);
    EXPECT_NEAR(m[4], 1.5, 1e-12);
    const Moments z = time_average([](double) { return 0.0; }, 1.0, 16, 6);
    for (int i = 1; i <= 6; ++i) EXPECT_EQ(z[i], 0.0);
}

TEST(TimeAverage, SecondMomentOfRandomMultisine) {
    std::mt19937_64 rng(3);
    for (int N = 1; N <= 8; ++N) {
        const CVector c = oracle::random_cvector(N, rng);
        const int k0 = 5 * N;
        auto y = [&](double t) {
            double v = 0.0;
            for (int n = 0; n < N; ++n) v += std::sqrt(2.0) * (c(n) * std::polar(1.0, kTwoPi * (k0 + n) * t)).real();
            return v;
        };
        const Moments m = time_average(y, 1.0, static_cast<std::size_t>(64 * (k0 + N)), 2);
        EXPECT_NEAR(m[2] / c.squaredNorm(), 1.0, 1e-9);
    }
}

TEST(TimeAverage, AliasingGuard) {
    EXPECT_THROW(time_average([](double) { return 1.0; }, 1.0, 8, 4, 4), SamplingError);
    EXPECT_THROW(time_average([](double) { return 1.0; }, 1.0, 0, 4), SamplingError);
}

namespace {

void expect_symmetric_unitary(const CMatrix& t, double tol) {
    const auto n = t.rows();
    EXPECT_LT((t - t.transpose()).cwiseAbs().maxCoeff(), tol);
    EXPECT_LT((t.adjoint() * t - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), tol);
}

}  // namespace

TEST(SymmetricUnitary, IdentityForConjugatePair) {
    CVector a = CVector::Zero(3);
    a(0) = 1.0;
    const CMatrix t = symmetric_unitary_from_pair(a, a.conjugate(), 0.0);
    expect_symmetric_unitary(t, 1e-12);
    EXPECT_NEAR(std::abs((a.transpose() * t * a)(0) - 1.0), 0.0, 1e-12);
}

TEST(SymmetricUnitary, RandomPairsHitRequestedCoupling) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        CVector a = oracle::random_cvector(4, rng);
        CVector b = oracle::random_cvector(4, rng);
        a.normalize();
        b.normalize();
        const double phase = 0.37 * trial;
        const CMatrix t = symmetric_unitary_from_pair(a, b, phase);
        expect_symmetric_unitary(t, 1e-12);
        const cplx coupling = (b.transpose() * t * a)(0);
        EXPECT_NEAR(std::abs(coupling - std::polar(1.0, phase)), 0.0, 1e-12);
    }
}

TEST(SymmetricUnitary, ScalarCase) {
    CVector a(1), b(1);
    a(0) = std::polar(1.0, 0.4);
    b(0) = std::polar(1.0, -1.1);
    const CMatrix t = symmetric_unitary_from_pair(a, b, 0.25);
    EXPECT_NEAR(std::abs(t(0, 0) - std::polar(1.0, 0.25 - 0.4 + 1.1)), 0.0, 1e-14);
}

TEST(GaussHermite, IntegratesPolynomialsExactly) {
    const auto rule = gauss_hermite(20);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i];
        m0 += rule.weights[i];
        m2 += rule.weights[i] * x * x;
        m4 += rule.weights[i] * x * x * x * x;
    }
    EXPECT_NEAR(m0, std::sqrt(kPi), 1e-13);
    EXPECT_NEAR(m2, std::sqrt(kPi) / 2.0, 1e-13);
    EXPECT_NEAR(m4, 3.0 * std::sqrt(kPi) / 4.0, 1e-13);
}
