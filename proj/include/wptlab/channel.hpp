#pragma once

// Frequency-selective MIMO channel responses on a uniform tone grid.

#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace wptlab {

/// Tones f_n = f0 + n * delta_f, n = 0..n_tones-1, each of bandwidth bandwidth_fw <= delta_f.
struct ToneGrid {
    double f0 = 5.18e9;
    double delta_f = 1e6;
    int n_tones = 1;
    double bandwidth_fw = 1e6;

    static ToneGrid uniform(int n, double f0 = 5.18e9, double delta_f = 1e6) {
        return ToneGrid{f0, delta_f, n, delta_f};
    }

    double frequency(int n) const { return f0 + n * delta_f; }

    void validate() const {
        if (!(f0 > 0.0) || !(delta_f > 0.0) || !(bandwidth_fw > 0.0))
            throw DomainError("ToneGrid: frequencies must be positive");
        if (n_tones < 1) throw DomainError("ToneGrid: need at least one tone");
        if (bandwidth_fw > delta_f) throw DomainError("ToneGrid: bandwidth_fw must not exceed delta_f");
    }
};

/// Multipath profile: per-path delay and amplitude; phases indexed [q][m][n][l]
/// (flattened, row-major). Empty `phases` means all zero.
struct MultipathProfile {
    std::vector<double> delays;
    std::vector<double> gains;
    std::vector<double> phases;

    std::size_t paths() const { return delays.size(); }
};

struct ChannelResponse {
    ToneGrid grid;
    std::vector<CMatrix> h;  // one Q x M matrix per tone

    int tones() const { return static_cast<int>(h.size()); }
    Eigen::Index rx() const { return h.empty() ? 0 : h.front().rows(); }
    Eigen::Index tx() const { return h.empty() ? 0 : h.front().cols(); }

    /// Row q of tone n as a 1 x M vector.
    Eigen::RowVectorXcd row(int n, Eigen::Index q = 0) const { return h[static_cast<std::size_t>(n)].row(q); }

    void validate() const {
        if (h.empty()) throw ShapeError("ChannelResponse: no tones");
        if (static_cast<int>(h.size()) != grid.n_tones)
            throw ShapeError("ChannelResponse: tone count does not match grid");
        for (const auto& m : h) {
            if (m.rows() != rx() || m.cols() != tx()) throw ShapeError("ChannelResponse: inconsistent dimensions");
            if (!m.allFinite()) throw NonFiniteError("ChannelResponse: non-finite entry");
        }
    }
};

/// SISO channel from per-tone complex gains.
inline ChannelResponse siso_channel(std::span<const cplx> gains, const ToneGrid* grid = nullptr) {
    ChannelResponse ch;
    ch.grid = grid ? *grid : ToneGrid::uniform(static_cast<int>(gains.size()));
    for (const cplx& g : gains) {
        CMatrix m(1, 1);
        m(0, 0) = g;
        ch.h.push_back(m);
    }
    return ch;
}

/// Single-tone channel with the given Q x M matrix.
inline ChannelResponse narrowband_channel(const CMatrix& h) {
    ChannelResponse ch;
    ch.grid = ToneGrid::uniform(1);
    ch.h.push_back(h);
    return ch;
}

/// h_{q,m,n} = sum_l alpha_l exp(j(-2 pi f_n tau_l + zeta_{q,m,n,l})).
inline ChannelResponse response_from_multipath(const MultipathProfile& profile, const ToneGrid& grid,
                                               Eigen::Index M, Eigen::Index Q) {
    grid.validate();
    const std::size_t L = profile.paths();
    if (profile.gains.size() != L) throw DimensionError("MultipathProfile: gains/delays size mismatch");
    const std::size_t expected_phases = static_cast<std::size_t>(Q * M) * static_cast<std::size_t>(grid.n_tones) * L;
    if (!profile.phases.empty() && profile.phases.size() != expected_phases)
        throw DimensionError("MultipathProfile: phases must be sized Q*M*N*L");
    if (L > 0) {
        double lo = profile.delays.front(), hi = profile.delays.front();
        for (double t : profile.delays) {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        if (hi - lo >= 1.0 / grid.bandwidth_fw)
            throw NarrowbandError("response_from_multipath: delay spread violates the narrowband condition");
    }
    ChannelResponse ch;
    ch.grid = grid;
    ch.h.assign(static_cast<std::size_t>(grid.n_tones), CMatrix::Zero(Q, M));
    for (int n = 0; n < grid.n_tones; ++n) {
        const double fn = grid.frequency(n);
        for (Eigen::Index q = 0; q < Q; ++q)
            for (Eigen::Index m = 0; m < M; ++m) {
                cplx acc = 0.0;
                for (std::size_t l = 0; l < L; ++l) {
                    double zeta = 0.0;
                    if (!profile.phases.empty())
                        zeta = profile.phases[((static_cast<std::size_t>(q) * static_cast<std::size_t>(M) +
                                                static_cast<std::size_t>(m)) *
                                                   static_cast<std::size_t>(grid.n_tones) +
                                               static_cast<std::size_t>(n)) *
                                                  L +
                                              l];
                    // Reduce f*tau modulo one cycle before forming the phase.
                    const double cycles = fn * profile.delays[l];
                    const double frac = cycles - std::floor(cycles);
                    acc += profile.gains[l] * std::polar(1.0, -kTwoPi * frac + zeta);
                }
                ch.h[static_cast<std::size_t>(n)](q, m) = acc;
            }
    }
    return ch;
}

/// Entries i.i.d. CN(0, 1).
inline ChannelResponse rayleigh_iid(Eigen::Index M, Eigen::Index Q, const ToneGrid& grid, std::uint64_t seed) {
    grid.validate();
    auto rng = make_rng(seed, 0xc4a7);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    ChannelResponse ch;
    ch.grid = grid;
    for (int n = 0; n < grid.n_tones; ++n) {
        CMatrix m(Q, M);
        for (Eigen::Index q = 0; q < Q; ++q)
            for (Eigen::Index k = 0; k < M; ++k) {
                const double re = nd(rng);
                const double im = nd(rng);
                m(q, k) = cplx(re, im);
            }
        ch.h.push_back(std::move(m));
    }
    return ch;
}

/// ||h_n|| / sqrt(M) per tone (single receive antenna).
inline std::vector<double> hardening_statistic(const ChannelResponse& ch) {
    if (ch.rx() != 1) throw ShapeError("hardening_statistic: requires Q = 1");
    std::vector<double> out;
    out.reserve(ch.h.size());
    const double root_m = std::sqrt(static_cast<double>(ch.tx()));
    for (const auto& m : ch.h) out.push_back(m.norm() / root_m);
    return out;
}

}  // namespace wptlab
