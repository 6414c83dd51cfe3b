#pragma once

// Passive beamforming with reconfigurable impedance networks: single-, group- and
// fully-connected scattering matrices.

#include "wptlab/errors.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace wptlab {

struct IrsConfig {
    Eigen::Index elements = 0;
    Eigen::Index group_size = 1;
    CMatrix theta;

    Eigen::Index groups() const { return group_size > 0 ? elements / group_size : 0; }

    double symmetry_residual() const { return (theta - theta.transpose()).cwiseAbs().maxCoeff(); }
    double unitarity_residual() const {
        return (theta.adjoint() * theta - CMatrix::Identity(elements, elements)).cwiseAbs().maxCoeff();
    }
    /// Largest magnitude outside the diagonal blocks.
    double block_leakage() const {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < elements; ++i)
            for (Eigen::Index j = 0; j < elements; ++j)
                if (i / group_size != j / group_size) worst = std::max(worst, std::abs(theta(i, j)));
        return worst;
    }
};

struct IrsResult {
    IrsConfig config;
    cplx h_eff;
    double h_abs = 0.0;
};

/// g_d + g_r Theta g_i
inline cplx irs_effective_channel(cplx g_d, const CVector& g_r, const CMatrix& theta, const CVector& g_i) {
    if (g_r.size() == 0) return g_d;
    return g_d + (g_r.transpose() * theta * g_i)(0);
}

/// Block-diagonal design: each block maps its incident subvector onto the conjugate
/// reflect subvector so that every group adds |g_r,g||g_i,g| in phase with g_d.
inline IrsResult optimize_group_connected(cplx g_d, const CVector& g_r, const CVector& g_i, Eigen::Index group_size) {
    const Eigen::Index L = g_r.size();
    if (g_i.size() != L) throw DimensionError("irs: g_r and g_i lengths differ");
    if (group_size < 1 || (L > 0 && L % group_size != 0)) throw DivisibilityError("irs: group size must divide L");
    const double phase = std::abs(g_d) > 0.0 ? std::arg(g_d) : 0.0;
    IrsResult res;
    res.config.elements = L;
    res.config.group_size = group_size;
    res.config.theta = CMatrix::Zero(L, L);
    for (Eigen::Index g = 0; g * group_size < L; ++g) {
        const Eigen::Index off = g * group_size;
        const CVector gr = g_r.segment(off, group_size);
        const CVector gi = g_i.segment(off, group_size);
        const double nr = gr.norm(), ni = gi.norm();
        CMatrix block;
        if (nr > 0.0 && ni > 0.0) {
            block = symmetric_unitary_from_pair(gi / ni, gr / nr, phase);
        } else {
            block = CMatrix::Identity(group_size, group_size);
        }
        res.config.theta.block(off, off, group_size, group_size) = block;
    }
    res.h_eff = irs_effective_channel(g_d, g_r, res.config.theta, g_i);
    res.h_abs = std::abs(res.h_eff);
    return res;
}

/// Diagonal Theta: theta_l = arg(g_d) - arg(g_r,l g_i,l).
inline IrsResult optimize_single_connected(cplx g_d, const CVector& g_r, const CVector& g_i) {
    const Eigen::Index L = g_r.size();
    if (g_i.size() != L) throw DimensionError("irs: g_r and g_i lengths differ");
    const double phase = std::abs(g_d) > 0.0 ? std::arg(g_d) : 0.0;
    IrsResult res;
    res.config.elements = L;
    res.config.group_size = 1;
    res.config.theta = CMatrix::Zero(L, L);
    for (Eigen::Index l = 0; l < L; ++l) res.config.theta(l, l) = std::polar(1.0, phase - std::arg(g_r(l) * g_i(l)));
    res.h_eff = irs_effective_channel(g_d, g_r, res.config.theta, g_i);
    res.h_abs = std::abs(res.h_eff);
    return res;
}

inline IrsResult optimize_fully_connected(cplx g_d, const CVector& g_r, const CVector& g_i) {
    return optimize_group_connected(g_d, g_r, g_i, std::max<Eigen::Index>(g_r.size(), 1));
}

/// |g_d| + sum_g ||g_r,g|| ||g_i,g||: the value every optimal block design attains.
inline double group_connected_gain(cplx g_d, const CVector& g_r, const CVector& g_i, Eigen::Index group_size) {
    const Eigen::Index L = g_r.size();
    if (group_size < 1 || (L > 0 && L % group_size != 0)) throw DivisibilityError("irs: group size must divide L");
    double s = std::abs(g_d);
    for (Eigen::Index off = 0; off < L; off += group_size)
        s += g_r.segment(off, group_size).norm() * g_i.segment(off, group_size).norm();
    return s;
}

struct GainStudyRow {
    Eigen::Index group_size = 1;
    double mean_power = 0.0;
    double gain = 0.0;  // mean |h|^2 / mean |h_single|^2 - 1
};

/// Monte Carlo received-power gain of each group size over the single-connected
/// design, with i.i.d. CN(0,1) reflect/incident channels and no direct link. Uses the
/// closed-form optimum value (identical to the constructed designs).
inline std::vector<GainStudyRow> gain_study(Eigen::Index L, const std::vector<Eigen::Index>& group_sizes,
                                            std::size_t trials, std::uint64_t seed) {
    if (L < 1 || trials == 0) throw DomainError("gain_study: need L >= 1 and trials >= 1");
    for (Eigen::Index g : group_sizes)
        if (g < 1 || L % g != 0) throw DivisibilityError("gain_study: group size must divide L");
    std::vector<double> acc(group_sizes.size(), 0.0);
    double acc_single = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        auto rng = make_rng(seed, t + 1);
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        CVector gr(L), gi(L);
        for (Eigen::Index l = 0; l < L; ++l) {
            const double a = nd(rng), b = nd(rng), c = nd(rng), d = nd(rng);
            gr(l) = cplx(a, b);
            gi(l) = cplx(c, d);
        }
        acc_single += std::pow(group_connected_gain(0.0, gr, gi, 1), 2);
        for (std::size_t k = 0; k < group_sizes.size(); ++k)
            acc[k] += std::pow(group_connected_gain(0.0, gr, gi, group_sizes[k]), 2);
    }
    std::vector<GainStudyRow> rows;
    for (std::size_t k = 0; k < group_sizes.size(); ++k) {
        GainStudyRow r;
        r.group_size = group_sizes[k];
        r.mean_power = acc[k] / static_cast<double>(trials);
        r.gain = acc[k] / acc_single - 1.0;
        rows.push_back(r);
    }
    return rows;
}

/// Index of the tone with the largest ||g_r,n|| ||g_i,n||.
inline std::size_t strongest_product_tone(const std::vector<CVector>& g_r, const std::vector<CVector>& g_i) {
    if (g_r.size() != g_i.size() || g_r.empty()) throw DimensionError("irs: per-tone channel lists differ");
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t n = 0; n < g_r.size(); ++n) {
        const double v = g_r[n].norm() * g_i[n].norm();
        if (v > best_v) {
            best_v = v;
            best = n;
        }
    }
    return best;
}

}  // namespace wptlab
