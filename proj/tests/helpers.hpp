#pragma once

#include <cmath>

#include "risec/ao.hpp"
#include "risec/dunet.hpp"

namespace risec::test {

/// Single-antenna-receiver toy: K users, E eves, N_B BS antennas, jx * jz RIS.
inline Scene toy_scene(int users, int eves, int bs, int jx, int jz, std::uint64_t placement = 7) {
    Placement pl;
    pl.seed = placement;
    Scene s = Scene::defaults(users, eves, pl);
    s.n_bs_antennas = bs;
    s.n_user_antennas = 1;
    s.n_eve_antennas = 1;
    s.ris_jx = jx;
    s.ris_jz = jz;
    return s;
}

inline Problem problem_for(const Scene& s, const ChannelSet& ch, double upsilon = 0.0, double rel = 0.05) {
    return make_problem(s, ch, HardwareProfile{upsilon}, UncertaintyModel::relative(ch, rel, rel));
}

inline CMat random_psd(int n, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> g;
    CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cd(g(rng), g(rng));
    return scale * a * a.adjoint();
}

inline RVec random_phases(int j, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    RVec w(j);
    for (int m = 0; m < j; ++m) w(m) = u(rng);
    return w;
}

/// Random primal state whose covariances share the power budget.
inline AoState random_state(const Problem& p, Rng& rng) {
    AoState s;
    double total = 0.0;
    for (int k = 0; k < p.users(); ++k) {
        s.q.push_back(random_psd(p.lifted_dim(), rng));
        total += s.q.back().trace().real();
    }
    for (auto& q : s.q) q *= 0.9 * p.power_budget / total;
    s.phases = random_phases(p.ris(), rng);
    return s;
}

inline bool same_bits(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a.data()[i] != b.data()[i]) return false;
    return true;
}

inline bool same_channels(const ChannelSet& a, const ChannelSet& b) {
    auto all = [](const std::vector<CMat>& x, const std::vector<CMat>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!same_bits(x[i], y[i])) return false;
        return true;
    };
    return all(a.h_bk, b.h_bk) && all(a.h_be, b.h_be) && same_bits(a.h_br, b.h_br) && all(a.h_rk, b.h_rk) &&
           all(a.h_re, b.h_re) && all(a.g_k, b.g_k) && all(a.g_e, b.g_e);
}

}  // namespace risec::test
