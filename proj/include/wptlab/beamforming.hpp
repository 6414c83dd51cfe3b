#pragma once

// Transmit beamforming: MRT, joint spatial/frequency design and phase-sweeping
// transmit diversity.

#include "wptlab/channel.hpp"
#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/rectenna.hpp"
#include "wptlab/waveform.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace wptlab {

struct Beamformer {
    std::vector<CVector> w;  // per tone, M entries
    double budget = 0.0;

    double power() const {
        double p = 0.0;
        for (const auto& v : w) p += v.squaredNorm();
        return p;
    }

    CMatrix as_matrix() const {
        CMatrix x(w.empty() ? 0 : w.front().size(), static_cast<Eigen::Index>(w.size()));
        for (std::size_t n = 0; n < w.size(); ++n) x.col(static_cast<Eigen::Index>(n)) = w[n];
        return x;
    }
};

/// w_n = sqrt(p_n) h_n^H / ||h_n||.
inline Beamformer mrt(const ChannelResponse& ch, const std::vector<double>& per_tone_power) {
    detail::require_miso(ch, "mrt");
    if (static_cast<int>(per_tone_power.size()) != ch.tones()) throw DimensionError("mrt: one power per tone");
    Beamformer bf;
    for (int n = 0; n < ch.tones(); ++n) {
        const double p = per_tone_power[static_cast<std::size_t>(n)];
        if (!(p >= 0.0)) throw DomainError("mrt: powers must be >= 0");
        const Eigen::RowVectorXcd h = ch.h[static_cast<std::size_t>(n)].row(0);
        const double nh = h.norm();
        if (nh == 0.0) throw ZeroChannelError("mrt: zero channel on tone " + std::to_string(n));
        bf.w.push_back(std::sqrt(p) * h.adjoint() / nh);
        bf.budget += p;
    }
    return bf;
}

/// Per-tone MRT followed by amplitude optimisation on the effective gains ||h_n||.
inline SignalSpec joint_bf_waveform(const ChannelResponse& ch, const EhTaylorModel& model, double power,
                                    const SolverConfig& cfg = {}) {
    return optimize_allocation(ch, model, power, cfg);
}

enum class Fading { Rayleigh, Rician };

struct DiversityReport {
    double mean_vout_td = 0.0;
    double mean_vout_single = 0.0;
    double stderr_td = 0.0;
    double stderr_single = 0.0;
    double mean_m2_td = 0.0;
    double mean_m2_single = 0.0;
    double stderr_m2_diff = 0.0;
    std::vector<double> vout_td;      // per fading draw, averaged over slots
    std::vector<double> vout_single;  // per fading draw
};

/// Phase-sweeping transmit diversity with M antennas sending CW at P/M each and an
/// i.i.d. uniform phase per antenna and slot; the single-antenna baseline sends P
/// through the first antenna's channel. Rician draws use a common unit-modulus
/// line-of-sight component with K-factor `k_factor`.
inline DiversityReport transmit_diversity_eval(const EhTaylorModel& model, int M, std::size_t fading_trials,
                                               int phase_slots, double power, std::uint64_t seed,
                                               Fading fading = Fading::Rayleigh, double k_factor = 0.0) {
    model.validate();
    if (M < 2) throw DomainError("transmit_diversity_eval: M must be >= 2");
    if (fading_trials == 0 || phase_slots < 1) throw DomainError("transmit_diversity_eval: need trials and slots");
    if (!(power > 0.0)) throw DomainError("transmit_diversity_eval: power must be > 0");
    if (fading == Fading::Rician && !(k_factor >= 0.0)) throw DomainError("transmit_diversity_eval: K-factor >= 0");

    auto vout_cw = [&](double amp2) {
        Moments m;
        m.max_order = 6;
        m.m[2] = amp2;
        m.m[4] = 1.5 * amp2 * amp2;
        m.m[6] = 2.5 * amp2 * amp2 * amp2;
        return model.vout_from_moments(m);
    };

    DiversityReport r;
    r.vout_td.resize(fading_trials);
    r.vout_single.resize(fading_trials);
    std::vector<double> m2_td(fading_trials), m2_single(fading_trials);
    const double los = fading == Fading::Rician ? std::sqrt(k_factor / (k_factor + 1.0)) : 0.0;
    const double nlos = fading == Fading::Rician ? std::sqrt(1.0 / (k_factor + 1.0)) : 1.0;
    for (std::size_t t = 0; t < fading_trials; ++t) {
        auto rng = make_rng(seed, t + 1);
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        std::uniform_real_distribution<double> ud(0.0, kTwoPi);
        std::vector<cplx> h(static_cast<std::size_t>(M));
        for (auto& e : h) {
            const double re = nd(rng);
            const double im = nd(rng);
            e = los + nlos * cplx(re, im);
        }
        // The transmit phases are drawn without looking at h.
        double acc_v = 0.0, acc_m2 = 0.0;
        for (int s = 0; s < phase_slots; ++s) {
            cplx y = 0.0;
            for (int m = 0; m < M; ++m) y += std::sqrt(power / M) * h[static_cast<std::size_t>(m)] * std::polar(1.0, ud(rng));
            acc_v += vout_cw(std::norm(y));
            acc_m2 += std::norm(y);
        }
        r.vout_td[t] = acc_v / phase_slots;
        m2_td[t] = acc_m2 / phase_slots;
        const double a2 = power * std::norm(h[0]);
        r.vout_single[t] = vout_cw(a2);
        m2_single[t] = a2;
    }
    auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
        double s = 0.0;
        for (double e : v) s += e;
        mean = s / static_cast<double>(v.size());
        double q = 0.0;
        for (double e : v) q += (e - mean) * (e - mean);
        se = v.size() > 1 ? std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
    };
    mean_se(r.vout_td, r.mean_vout_td, r.stderr_td);
    mean_se(r.vout_single, r.mean_vout_single, r.stderr_single);
    double se_unused = 0.0;
    mean_se(m2_td, r.mean_m2_td, se_unused);
    mean_se(m2_single, r.mean_m2_single, se_unused);
    std::vector<double> d(fading_trials);
    for (std::size_t t = 0; t < fading_trials; ++t) d[t] = m2_td[t] - m2_single[t];
    double dm = 0.0;
    mean_se(d, dm, r.stderr_m2_diff);
    return r;
}

/// Lower percentile bootstrap bound for mean(a) - mean(b) over paired samples.
inline double bootstrap_mean_diff_lower(const std::vector<double>& a, const std::vector<double>& b, double confidence,
                                        int resamples, std::uint64_t seed) {
    if (a.size() != b.size() || a.empty()) throw DimensionError("bootstrap: paired samples required");
    auto rng = make_rng(seed, 0xb007);
    std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
    std::vector<double> stats(static_cast<std::size_t>(resamples));
    for (auto& st : stats) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::size_t j = pick(rng);
            s += a[j] - b[j];
        }
        st = s / static_cast<double>(a.size());
    }
    std::sort(stats.begin(), stats.end());
    const auto idx = static_cast<std::size_t>(std::floor((1.0 - confidence) * static_cast<double>(resamples)));
    return stats[std::min(idx, stats.size() - 1)];
}

}  // namespace wptlab
