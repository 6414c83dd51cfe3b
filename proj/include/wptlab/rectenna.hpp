#pragma once

// Diode Taylor-expansion harvester: even moments of the received multisine and the
// output DC voltage/power.

#include "wptlab/channel.hpp"
#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/signal.hpp"
#include "wptlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

namespace wptlab {

struct EhTaylorModel {
    int n_o = 4;
    double r_ant = 50.0;
    double n_ideality = 1.05;
    double v_t = 25.85e-3;
    double r_load = 1000.0;
    double i_s = 5e-6;  // saturation current; cancels from the truncated model

    void validate() const {
        if (n_o != 2 && n_o != 4 && n_o != 6) throw DomainError("EhTaylorModel: n_o must be 2, 4 or 6");
        if (!(r_ant > 0.0) || !(n_ideality > 0.0) || !(v_t > 0.0) || !(r_load > 0.0) || !(i_s > 0.0))
            throw DomainError("EhTaylorModel: parameters must be positive");
    }

    /// beta_i = R_ant^{i/2} / (i! (n v_t)^{i-1}); zero for orders above n_o.
    double beta(int i) const {
        if (i % 2 != 0 || i < 2 || i > 6) throw OrderError("EhTaylorModel::beta: order must be 2, 4 or 6");
        if (i > n_o) return 0.0;
        double fact = 1.0;
        for (int k = 2; k <= i; ++k) fact *= k;
        return std::pow(r_ant, i / 2.0) / (fact * std::pow(n_ideality * v_t, i - 1));
    }

    double vout_from_moments(const Moments& m) const {
        double v = 0.0;
        for (int i = 2; i <= n_o; i += 2) v += beta(i) * m[i];
        return v;
    }
};

/// Received spectrum: y(t) = sqrt(2) Re{ sum_n c_n z_n e^{j 2 pi f_n t} } where z_n
/// follows `symbols` (Cw{1} for a deterministic multisine).
struct ReceivedSignal {
    CVector c;
    InputDistribution symbols = dist::Cw{1.0};

    static ReceivedSignal multisine(CVector c) { return ReceivedSignal{std::move(c), dist::Cw{1.0}}; }

    bool deterministic() const { return is_deterministic(symbols); }
};

struct HarvestReport {
    double p_rf = 0.0;    // received RF power (W)
    double v_out = 0.0;   // DC output voltage (V)
    double p_dc = 0.0;    // DC output power (W)
    double e3 = 0.0;      // RF-to-DC efficiency
    double v_out_stderr = 0.0;
    double p_dc_stderr = 0.0;
    std::size_t trials = 0;

    static HarvestReport from(double p_rf, double v_out, double r_load) {
        HarvestReport r;
        r.p_rf = p_rf;
        r.v_out = v_out;
        r.p_dc = v_out * v_out / r_load;
        r.e3 = p_rf > 0.0 ? r.p_dc / p_rf : 0.0;
        return r;
    }
};

/// Time-average ratios <cos^i> for i = 2, 4, 6.
inline double zeta(int i) {
    switch (i) {
        case 2: return 0.5;
        case 4: return 3.0 / 8.0;
        case 6: return 5.0 / 16.0;
        default: throw OrderError("zeta: order must be 2, 4 or 6");
    }
}

/// sum_i beta_i zeta_i a^i for a sinusoid of peak amplitude a. With the sqrt(2)
/// convention a single tone of complex amplitude c has a = sqrt(2)|c|.
inline double vout_zeta_form(const EhTaylorModel& model, double a) {
    double v = 0.0;
    for (int i = 2; i <= model.n_o; i += 2) v += model.beta(i) * zeta(i) * std::pow(a, i);
    return v;
}

/// Samples one period of the multisine on a low-IF grid: tone n sits at harmonic
/// k + n with k = max_order * N, which keeps every mixing product that is not DC
/// away from DC, so the even moments equal those of the true passband signal.
class MultisineSampler {
public:
    MultisineSampler(Eigen::Index tones, int max_order, std::size_t samples = 0)
        : n_(tones), order_(max_order) {
        if (tones < 1) throw DimensionError("MultisineSampler: need at least one tone");
        if (max_order < 2 || max_order > kMaxMomentOrder) throw OrderError("MultisineSampler: bad order");
        offset_ = static_cast<std::size_t>(max_order) * static_cast<std::size_t>(tones);
        const std::size_t bound = offset_ + static_cast<std::size_t>(tones) - 1;
        if (samples == 0) samples = 64 * static_cast<std::size_t>(tones) * static_cast<std::size_t>(max_order);
        if (samples <= static_cast<std::size_t>(max_order) * bound)
            throw SamplingError("MultisineSampler: " + std::to_string(samples) +
                                " samples/period is below the aliasing floor " +
                                std::to_string(static_cast<std::size_t>(max_order) * bound + 1));
        table_.resize(static_cast<Eigen::Index>(samples), tones);
        for (std::size_t s = 0; s < samples; ++s)
            for (Eigen::Index n = 0; n < tones; ++n) {
                // Integer harmonic index keeps the phase argument exact modulo one period.
                const std::size_t h = ((offset_ + static_cast<std::size_t>(n)) * s) % samples;
                table_(static_cast<Eigen::Index>(s), n) =
                    std::polar(std::sqrt(2.0), kTwoPi * static_cast<double>(h) / static_cast<double>(samples));
            }
    }

    std::size_t samples() const { return static_cast<std::size_t>(table_.rows()); }
    int max_order() const { return order_; }

    RVector waveform(const CVector& c) const {
        if (c.size() != n_) throw DimensionError("MultisineSampler: tone count mismatch");
        return (table_ * c).real();
    }

    Moments moments(const CVector& c) const {
        const RVector y = waveform(c);
        return moments_of_samples(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), order_);
    }

private:
    Eigen::Index n_;
    int order_;
    std::size_t offset_ = 0;
    CMatrix table_;
};

/// Even moments of a deterministic multisine: m2 and m4 in closed form, m6 sampled.
inline Moments moments_deterministic(const CVector& c, int order) {
    if (order != 2 && order != 4 && order != 6) throw OrderError("moments_deterministic: order must be 2, 4 or 6");
    if (!c.allFinite()) throw NonFiniteError("moments_deterministic: non-finite amplitudes");
    Moments m;
    m.max_order = order;
    m.m[0] = 1.0;
    m.m[2] = c.squaredNorm();
    if (order >= 4) {
        // D_k = sum_{a+b=k} c_a c_b; sum_{n0+n1=n2+n3} c c c* c* = sum_k |D_k|^2.
        const Eigen::Index n = c.size();
        double s = 0.0;
        for (Eigen::Index k = 0; k <= 2 * (n - 1); ++k) {
            cplx d = 0.0;
            for (Eigen::Index a = std::max<Eigen::Index>(0, k - n + 1); a <= std::min(k, n - 1); ++a) d += c(a) * c(k - a);
            s += std::norm(d);
        }
        m.m[4] = 1.5 * s;
    }
    if (order >= 6) {
        if (c.size() == 0 || c.squaredNorm() == 0.0) {
            m.m[6] = 0.0;
        } else {
            m.m[6] = MultisineSampler(c.size(), 6).moments(c)[6];
        }
    }
    return m;
}

inline Moments moments_deterministic(const ReceivedSignal& s, int order) {
    if (!s.deterministic()) throw UnsupportedError("moments_deterministic: signal is stochastic");
    return moments_deterministic(s.c, order);
}

struct DistributionMoments {
    double e2 = 0.0;  // E|x|^2
    double e4 = 0.0;  // E|x|^4
    double e6 = 0.0;  // E|x|^6
};

inline DistributionMoments moments_distribution(const InputDistribution& d) {
    validate(d);
    return {abs_moment(d, 2), abs_moment(d, 4), abs_moment(d, 6)};
}

/// Moments of a single-subband signal carrying symbols x ~ dist through gain c:
/// the carrier phase averages out, leaving m_i = 2^{i/2} <cos^i> |c|^i E|x|^i.
inline Moments moments_single_subband(cplx c, const InputDistribution& d) {
    const auto dm = moments_distribution(d);
    const double a2 = std::norm(c);
    Moments m;
    m.max_order = 6;
    m.m[0] = 1.0;
    m.m[2] = a2 * dm.e2;
    m.m[4] = 1.5 * a2 * a2 * dm.e4;
    m.m[6] = 2.5 * a2 * a2 * a2 * dm.e6;
    return m;
}

inline HarvestReport harvest(const EhTaylorModel& model, const ReceivedSignal& s) {
    model.validate();
    Moments m;
    if (s.deterministic()) {
        const double amp = std::sqrt(average_power(s.symbols));
        m = moments_deterministic(CVector(s.c * amp), model.n_o);
    } else {
        if (s.c.size() != 1)
            throw UnsupportedError("harvest: multi-subband modulated inputs need monte_carlo_harvest");
        m = moments_single_subband(s.c(0), s.symbols);
    }
    return HarvestReport::from(m[2], model.vout_from_moments(m), model.r_load);
}

/// sum_i beta_i P^{i/2}: Jensen lower bound on v_out for received power P.
inline double jensen_lower_bound(const EhTaylorModel& model, double p_rf) {
    if (!(p_rf >= 0.0)) throw DomainError("jensen_lower_bound: power must be >= 0");
    double v = 0.0;
    for (int i = 2; i <= model.n_o; i += 2) v += model.beta(i) * std::pow(p_rf, i / 2.0);
    return v;
}

/// Received spectrum of receive antenna q for given per-tone symbols z.
inline CVector received_spectrum(const SignalSpec& sig, const ChannelResponse& ch, const CVector& z,
                                 Eigen::Index q = 0) {
    const Eigen::Index n_tones = sig.tones();
    CVector c(n_tones);
    for (Eigen::Index n = 0; n < n_tones; ++n)
        c(n) = (ch.h[static_cast<std::size_t>(n)].row(q) * sig.weights.col(n))(0) * z(n);
    return c;
}

/// Monte Carlo harvester: draws per-tone symbols, samples y(t) over one period per
/// draw and averages the moments. One report per receive antenna (DC combining uses
/// the sum of the per-branch powers). Trial t uses RNG stream t, so results do not
/// depend on `jobs`.
inline std::vector<HarvestReport> monte_carlo_harvest_branches(const EhTaylorModel& model, const SignalSpec& sig,
                                                               const ChannelResponse& ch, std::size_t trials,
                                                               std::uint64_t seed, unsigned jobs = 1) {
    model.validate();
    sig.validate();
    ch.validate();
    if (trials == 0) throw DomainError("monte_carlo_harvest: trials must be >= 1");
    if (ch.tones() != sig.tones() || ch.tx() != sig.antennas())
        throw DimensionError("monte_carlo_harvest: signal and channel dimensions differ");
    const Eigen::Index Q = ch.rx();
    const Eigen::Index N = sig.tones();
    const bool det = sig.deterministic_only();
    const std::size_t runs = det ? 1 : trials;
    const MultisineSampler sampler(N, model.n_o);

    // per-trial values: [q][trial] of (m2, v)
    std::vector<std::vector<double>> m2(static_cast<std::size_t>(Q), std::vector<double>(runs));
    std::vector<std::vector<double>> vv(static_cast<std::size_t>(Q), std::vector<double>(runs));

    auto work = [&](std::size_t lo, std::size_t hi) {
        CVector z(N);
        for (std::size_t t = lo; t < hi; ++t) {
            auto rng = make_rng(seed, t + 1);
            for (Eigen::Index n = 0; n < N; ++n) z(n) = draw(sig.symbols[static_cast<std::size_t>(n)], rng);
            for (Eigen::Index q = 0; q < Q; ++q) {
                const Moments m = sampler.moments(received_spectrum(sig, ch, z, q));
                m2[static_cast<std::size_t>(q)][t] = m[2];
                vv[static_cast<std::size_t>(q)][t] = model.vout_from_moments(m);
            }
        }
    };
    const unsigned nj = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(runs)));
    if (nj == 1) {
        work(0, runs);
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < nj; ++j)
            pool.emplace_back(work, runs * j / nj, runs * (j + 1) / nj);
        for (auto& th : pool) th.join();
    }

    std::vector<HarvestReport> out;
    for (Eigen::Index q = 0; q < Q; ++q) {
        const auto& mv = m2[static_cast<std::size_t>(q)];
        const auto& v = vv[static_cast<std::size_t>(q)];
        double sm = 0.0, sv = 0.0;
        for (std::size_t t = 0; t < runs; ++t) {
            sm += mv[t];
            sv += v[t];
        }
        const double mean_m2 = sm / static_cast<double>(runs);
        const double mean_v = sv / static_cast<double>(runs);
        double var = 0.0;
        for (std::size_t t = 0; t < runs; ++t) var += (v[t] - mean_v) * (v[t] - mean_v);
        const double se = runs > 1 ? std::sqrt(var / static_cast<double>(runs - 1) / static_cast<double>(runs)) : 0.0;
        HarvestReport r = HarvestReport::from(mean_m2, mean_v, model.r_load);
        r.v_out_stderr = se;
        r.p_dc_stderr = 2.0 * std::abs(mean_v) * se / model.r_load;
        r.trials = trials;
        out.push_back(r);
    }
    return out;
}

inline HarvestReport monte_carlo_harvest(const EhTaylorModel& model, const SignalSpec& sig, const ChannelResponse& ch,
                                         std::size_t trials, std::uint64_t seed, unsigned jobs = 1) {
    if (ch.rx() != 1) throw ShapeError("monte_carlo_harvest: use monte_carlo_harvest_branches for Q > 1");
    return monte_carlo_harvest_branches(model, sig, ch, trials, seed, jobs).front();
}

}  // namespace wptlab
