#include "risec/oracle.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "risec/linalg.hpp"

namespace risec {

void OracleConfig::validate() const {
    if (phase_levels < 1) throw Error(ErrorKind::Config, "phase_levels must be >= 1");
    if (power_steps < 1) throw Error(ErrorKind::Config, "power_steps must be >= 1");
    if (!(max_points > 0.0)) throw Error(ErrorKind::Config, "max_points must be positive");
}

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Power-unit vectors u with sum <= steps, in lexicographic order.
std::vector<std::vector<int>> simplex_grid(int users, int steps) {
    std::vector<std::vector<int>> out;
    std::vector<int> u(static_cast<std::size_t>(users), 0);
    auto rec = [&](auto&& self, int k, int left) -> void {
        if (k == users) {
            out.push_back(u);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            u[static_cast<std::size_t>(k)] = v;
            self(self, k + 1, left - v);
        }
    };
    rec(rec, 0, steps);
    return out;
}

CVec unit(const CVec& v) {
    const double n = v.norm();
    return n > 0.0 ? CVec(v / n) : v;
}

// Candidate directions of user k for one phase configuration.
std::array<CVec, OracleConfig::kDirections> directions(const Problem& p, const std::vector<CMat>& h_user,
                                                       const std::vector<CMat>& h_eve, int k) {
    const int nb = p.bs();
    const auto ki = static_cast<std::size_t>(k);
    const CMat rk = h_user[ki].adjoint() * h_user[ki];
    std::array<CVec, OracleConfig::kDirections> d;
    d[0] = linalg::top_eigenvector(rk);

    // zero-forcing: restrict to the orthogonal complement of the other users' rows
    CMat others(0, nb);
    for (int j = 0; j < p.users(); ++j) {
        if (j == k) continue;
        const CMat& h = h_user[static_cast<std::size_t>(j)];
        CMat grown(others.rows() + h.rows(), nb);
        grown << others, h;
        others = grown;
    }
    d[1] = d[0];
    if (others.rows() > 0) {
        Eigen::JacobiSVD<CMat> svd(others, Eigen::ComputeFullV);
        const auto rank = svd.rank();
        if (rank < nb) {
            const CMat basis = svd.matrixV().rightCols(nb - rank);
            const CMat proj = basis * basis.adjoint();
            const CVec v = linalg::top_eigenvector(linalg::hermitian_part(proj * rk * proj));
            if (v.norm() > 0.0) d[1] = unit(v);
        }
    }

    const CMat& he = h_eve[static_cast<std::size_t>(p.pairing[ki])];
    const double su = p.noise.user * static_cast<double>(h_user[ki].rows());
    const double se = p.noise.eve * static_cast<double>(he.rows());
    const CMat a = CMat::Identity(nb, nb) + (p.power_budget / su) * rk;
    const CMat b = CMat::Identity(nb, nb) + (p.power_budget / se) * (he.adjoint() * he);
    d[2] = unit(linalg::generalized_top(linalg::hermitian_part(a), linalg::hermitian_part(b)).vector);
    return d;
}

struct Gain {
    double full = 0.0;
    double diag = 0.0;
};

Gain gain(const CMat& r, const CVec& w) {
    Gain g;
    g.full = (w.adjoint() * r * w)(0, 0).real();
    for (Eigen::Index n = 0; n < w.size(); ++n) g.diag += r(n, n).real() * std::norm(w(n));
    return g;
}

}  // namespace

double oracle_points(const Problem& p, const OracleConfig& cfg) {
    cfg.validate();
    std::ostringstream why;
    if (p.users() > OracleConfig::kMaxUsers) why << "K=" << p.users() << " > " << OracleConfig::kMaxUsers << "; ";
    if (p.ch().num_eves() > OracleConfig::kMaxEves)
        why << "E=" << p.ch().num_eves() << " > " << OracleConfig::kMaxEves << "; ";
    if (p.bs() > OracleConfig::kMaxBs) why << "N_B=" << p.bs() << " > " << OracleConfig::kMaxBs << "; ";
    if (p.ris() > OracleConfig::kMaxRis) why << "J=" << p.ris() << " > " << OracleConfig::kMaxRis << "; ";
    const double points = std::pow(static_cast<double>(cfg.phase_levels), p.ris()) *
                          std::pow(static_cast<double>(OracleConfig::kDirections), p.users()) *
                          binomial(cfg.power_steps + p.users(), p.users());
    if (!why.str().empty())
        throw Error(ErrorKind::CapExceeded, "oracle instance caps exceeded: " + why.str() +
                                                "grid would need " + std::to_string(points) + " points");
    if (points > cfg.max_points)
        throw Error(ErrorKind::CapExceeded, "oracle grid needs " + std::to_string(points) + " points, budget is " +
                                                std::to_string(cfg.max_points));
    return points;
}

OracleResult grid_search(const Problem& p, const OracleConfig& cfg) {
    oracle_points(p, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const int k_users = p.users(), j = p.ris(), nb = p.bs(), ne_count = p.ch().num_eves();
    const double u = p.hw.upsilon, imp = (1.0 + u) * u;
    const auto powers = simplex_grid(k_users, cfg.power_steps);
    const int dir_combos = static_cast<int>(std::pow(OracleConfig::kDirections, k_users));
    long long phase_count = 1;
    for (int m = 0; m < j; ++m) phase_count *= cfg.phase_levels;

    OracleResult best;
    best.objective = -std::numeric_limits<double>::infinity();
    std::vector<int> digits(static_cast<std::size_t>(j), 0);
    for (long long pi = 0; pi < phase_count; ++pi) {
        long long rest = pi;
        RVec phases(j);
        CVec theta(j);
        for (int m = 0; m < j; ++m) {
            digits[static_cast<std::size_t>(m)] = static_cast<int>(rest % cfg.phase_levels);
            rest /= cfg.phase_levels;
            phases(m) = 2.0 * kPi * digits[static_cast<std::size_t>(m)] / cfg.phase_levels;
            theta(m) = std::polar(1.0, phases(m));
        }
        std::vector<CMat> h_user, h_eve, r_user, r_eve;
        for (int k = 0; k < k_users; ++k) {
            h_user.push_back(effective_channel(p.ch(), theta, Receiver::user(k)));
            r_user.push_back(h_user.back().adjoint() * h_user.back());
        }
        for (int e = 0; e < ne_count; ++e) {
            h_eve.push_back(effective_channel(p.ch(), theta, Receiver::eavesdropper(e)));
            r_eve.push_back(h_eve.back().adjoint() * h_eve.back());
        }
        std::vector<std::array<CVec, OracleConfig::kDirections>> dirs;
        for (int k = 0; k < k_users; ++k) dirs.push_back(directions(p, h_user, h_eve, k));

        // gains[rx][k][d]: user receivers first, then the paired eve of each user
        std::vector<std::vector<std::array<Gain, OracleConfig::kDirections>>> gu(static_cast<std::size_t>(k_users)),
            ge(static_cast<std::size_t>(k_users));
        for (int rx = 0; rx < k_users; ++rx) {
            const CMat& re = r_eve[static_cast<std::size_t>(p.pairing[static_cast<std::size_t>(rx)])];
            for (int k = 0; k < k_users; ++k) {
                std::array<Gain, OracleConfig::kDirections> a{}, b{};
                for (int d = 0; d < OracleConfig::kDirections; ++d) {
                    a[d] = gain(r_user[static_cast<std::size_t>(rx)], dirs[static_cast<std::size_t>(k)][d]);
                    b[d] = gain(re, dirs[static_cast<std::size_t>(k)][d]);
                }
                gu[static_cast<std::size_t>(rx)].push_back(a);
                ge[static_cast<std::size_t>(rx)].push_back(b);
            }
        }

        std::vector<int> choice(static_cast<std::size_t>(k_users));
        for (int dc = 0; dc < dir_combos; ++dc) {
            int rest_d = dc;
            for (int k = 0; k < k_users; ++k) {
                choice[static_cast<std::size_t>(k)] = rest_d % OracleConfig::kDirections;
                rest_d /= OracleConfig::kDirections;
            }
            for (const auto& units : powers) {
                ++best.visited;
                std::vector<CMat> cov;
                for (int k = 0; k < k_users; ++k) {
                    const auto ki = static_cast<std::size_t>(k);
                    const CVec& w = dirs[ki][choice[ki]];
                    cov.push_back(units[ki] * p.power_budget / cfg.power_steps * (w * w.adjoint()));
                }
                // residual is affine in a common scale a: a (r + n) - n, so an
                // infeasible point is pulled back onto the robust boundary
                double scale = 1.0;
                for (int k = 0; k < k_users; ++k) {
                    const auto ki = static_cast<std::size_t>(k);
                    const double r = robust_fast(omega_matrix(cov, k, p.hw, p.eps_eve),
                                                 h_eve[static_cast<std::size_t>(p.pairing[ki])], p.uncertainty, j,
                                                 u, p.noise.eve, p.outage)
                                         .residual;
                    const double n = (1.0 + u) * p.noise.eve *
                                     static_cast<double>(h_eve[static_cast<std::size_t>(p.pairing[ki])].rows());
                    if (r > 0.0) scale = std::min(scale, n / (r + n) * (1.0 - 1e-9));
                }
                if (!(scale > 0.0)) continue;
                double obj = 0.0;
                bool qos = true;
                for (int k = 0; k < k_users; ++k) {
                    const auto ki = static_cast<std::size_t>(k);
                    auto rate = [&](const std::vector<std::array<Gain, OracleConfig::kDirections>>& g, double noise) {
                        double sig = 0.0, rest_p = 0.0;
                        for (int i = 0; i < k_users; ++i) {
                            const auto ii = static_cast<std::size_t>(i);
                            const double pw = scale * units[ii] * p.power_budget / cfg.power_steps;
                            const Gain& gg = g[ii][choice[ii]];
                            if (i == k) {
                                sig = pw * gg.full;
                                rest_p += pw * (u * gg.full + imp * gg.diag);
                            } else {
                                rest_p += pw * (gg.full + imp * gg.diag);
                            }
                        }
                        return rate_from_sinr(std::max(sig, 0.0) / (std::max(rest_p, 0.0) + noise));
                    };
                    const double ru = rate(gu[ki], (1.0 + u) * p.noise.user * static_cast<double>(h_user[ki].rows()));
                    const auto ei = static_cast<std::size_t>(p.pairing[ki]);
                    const double re = rate(ge[ki], (1.0 + u) * p.noise.eve * static_cast<double>(h_eve[ei].rows()));
                    if (ru < p.eps_user) qos = false;
                    obj += ru - re;
                }
                if (!qos) continue;
                ++best.feasible_points;
                if (obj > best.objective) {
                    best.found = true;
                    best.objective = obj;
                    best.phase_digits = digits;
                    best.directions = choice;
                    best.power_units = units;
                    best.power_scale = scale;
                    best.design.phases = phases;
                    best.design.w.clear();
                    for (int k = 0; k < k_users; ++k) {
                        const auto ki = static_cast<std::size_t>(k);
                        CMat w = CMat::Zero(nb, p.streams);
                        w.col(0) = std::sqrt(scale * units[ki] * p.power_budget / cfg.power_steps) *
                                   dirs[ki][choice[ki]];
                        best.design.w.push_back(w);
                    }
                }
            }
        }
    }
    if (best.found) {
        best.report = secrecy_report(p.ch(), best.design, p.hw, p.noise, p.pairing);
        const auto rob = robust_all_users(p.ch(), best.design.covariances(nb), best.design.theta(), p.hw,
                                          p.uncertainty, p.noise, p.pairing, p.eps_eve, p.outage);
        for (const auto& r : rob) best.robust_residuals.push_back(r.residual);
        best.objective = best.report.sum_secrecy;
    } else {
        best.objective = 0.0;
    }
    best.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

GapReport compare(double a, bool fa, double b, bool fb) {
    GapReport g;
    g.objective_a = a;
    g.objective_b = b;
    g.feasible_a = fa;
    g.feasible_b = fb;
    g.relative_gap = (b - a) / std::max(std::abs(b), 1e-12);
    return g;
}

nlohmann::json to_json(const OracleResult& r, const OracleConfig& cfg) {
    nlohmann::json j;
    j["phase_levels"] = cfg.phase_levels;
    j["power_steps"] = cfg.power_steps;
    j["directions_per_user"] = OracleConfig::kDirections;
    j["found"] = r.found;
    j["objective"] = r.objective;
    j["visited"] = r.visited;
    j["feasible_points"] = r.feasible_points;
    j["phase_digits"] = r.phase_digits;
    j["directions"] = r.directions;
    j["power_units"] = r.power_units;
    j["power_scale"] = r.power_scale;
    j["robust_residuals"] = r.robust_residuals;
    if (r.found) j["design"] = design_to_json(r.design);
    return j;
}

nlohmann::json to_json(const GapReport& g) {
    return {{"objective_a", g.objective_a},
            {"objective_b", g.objective_b},
            {"relative_gap", g.relative_gap},
            {"feasible_a", g.feasible_a},
            {"feasible_b", g.feasible_b}};
}

}  // namespace risec
