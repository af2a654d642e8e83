#include "risec/ao.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "risec/linalg.hpp"

namespace risec {

Problem make_problem(const Scene& scene, const ChannelSet& channels, const HardwareProfile& hw,
                     const UncertaintyModel& u) {
    scene.validate();
    hw.validate();
    if (channels.num_users() != scene.num_users() || channels.num_eves() != scene.num_eves() ||
        channels.bs_antennas() != scene.n_bs_antennas || channels.ris_elements() != scene.ris_elements())
        throw Error(ErrorKind::Dimension, "channel set does not match the scene");
    Problem p;
    p.channels = &channels;
    p.hw = hw;
    p.uncertainty = u;
    p.noise = NoiseLevels::from(scene);
    p.pairing = scene.pairing;
    p.power_budget = scene.power_budget;
    p.eps_user = scene.eps_user;
    p.eps_eve = scene.eps_eve;
    p.outage = scene.outage;
    p.streams = scene.n_user_antennas;
    return p;
}

CVec AoState::theta() const {
    CVec t(phases.size());
    for (Eigen::Index m = 0; m < phases.size(); ++m) t(m) = std::polar(1.0, phases(m));
    return t;
}

std::vector<CMat> AoState::covariances(int bs_antennas) const {
    std::vector<CMat> c;
    c.reserve(q.size());
    for (const auto& qk : q) c.push_back(linalg::partial_trace_streams(qk, bs_antennas));
    return c;
}

AoState AoState::initial(const Problem& p) {
    AoState s;
    const int n = p.lifted_dim();
    const double level = p.power_budget / (static_cast<double>(p.users()) * n);
    for (int k = 0; k < p.users(); ++k) s.q.push_back(level * CMat::Identity(n, n));
    s.phases = RVec::Zero(p.ris());
    return s;
}

DualState DualState::initial(const Problem& p) {
    DualState d;
    const int n = p.lifted_dim();
    for (int k = 0; k < p.users(); ++k) d.xi.push_back(CMat::Identity(n, n));
    d.upsilon = CMat::Identity(p.ris() + 1, p.ris() + 1);
    d.psi = RVec::Zero(p.users());
    return d;
}

bool DualState::finite() const {
    if (!std::isfinite(mu) || !upsilon.allFinite() || !psi.allFinite()) return false;
    for (double v : d)
        if (!std::isfinite(v)) return false;
    for (const auto& x : xi)
        if (!x.allFinite()) return false;
    return true;
}

void AoConfig::validate() const {
    if (!(tolerance > 0.0)) throw Error(ErrorKind::Config, "AO tolerance must be positive");
    if (max_iters < 1) throw Error(ErrorKind::Config, "max_iters must be at least 1");
    if (!(step0 > 0.0)) throw Error(ErrorKind::Config, "dual step must be positive");
    if (!(psd_floor >= 0.0)) throw Error(ErrorKind::Config, "psd_floor must be non-negative");
    if (!(qos_step >= 0.0) || !(psi_max >= 0.0)) throw Error(ErrorKind::Config, "QoS step and bound must be non-negative");
    if (!(beam_damping > 0.0 && beam_damping <= 1.0)) throw Error(ErrorKind::Config, "beam_damping must lie in (0,1]");
    if (backtracks < 0) throw Error(ErrorKind::Config, "backtracks must be non-negative");
    if (patience < 1) throw Error(ErrorKind::Config, "patience must be at least 1");
}

NumericFlags& NumericFlags::operator+=(const NumericFlags& o) {
    singular_price += o.singular_price;
    negative_radicand += o.negative_radicand;
    phase_rejected += o.phase_rejected;
    return *this;
}

namespace {

// Nominal total power (signal, interference, distortion, noise) at the
// eavesdropper paired with each user. Robust residuals are measured in these
// units so their multipliers live on the same scale as the rate terms.
std::vector<double> robust_scales(const Problem& p, const std::vector<CMat>& cov, const CVec& theta) {
    std::vector<double> out;
    for (int k = 0; k < p.users(); ++k) {
        const int e = p.pairing.at(static_cast<std::size_t>(k));
        const CMat h = effective_channel(p.ch(), theta, Receiver::eavesdropper(e));
        const SinrTerms t = sinr_terms(h, cov, k, p.hw.upsilon, p.noise.eve);
        out.push_back(t.signal + t.interference + t.distortion + t.noise);
    }
    return out;
}

double log_outage(const Problem& p) { return std::log(1.0 / p.outage); }

double clip(double v, double c) { return std::clamp(v, -c, c); }

// Tr(A B) for Hermitian A, B.
double tr_prod(const CMat& a, const CMat& b) { return a.cwiseProduct(b.transpose()).sum().real(); }

struct Link {
    bool eve;
    int rx;
    int msg;
};

// Receiver / message pairs entering the objective: every user with its own
// message and every paired eavesdropper with the message it targets.
std::vector<Link> objective_links(const Problem& p) {
    std::vector<Link> out;
    for (int k = 0; k < p.users(); ++k) {
        out.push_back({false, k, k});
        out.push_back({true, p.pairing.at(static_cast<std::size_t>(k)), k});
    }
    return out;
}

double rx_noise(const Problem& p, const Link& l) {
    const auto i = static_cast<std::size_t>(l.rx);
    const double n = l.eve ? p.noise.eve : p.noise.user;
    const Eigen::Index rows = l.eve ? p.ch().h_be.at(i).cols() : p.ch().h_bk.at(i).cols();
    return (1.0 + p.hw.upsilon) * n * static_cast<double>(rows);
}

double weight_of(const DualState& d, int k) { return 1.0 + d.psi(k); }

double link_weight(const Link& l, const DualState& d) { return l.eve ? -1.0 : weight_of(d, l.msg); }

// Sum over users of (C_j + (1+u)u diag C_j).
CMat loaded_sum(const std::vector<CMat>& cov, double upsilon) {
    const double imp = (1.0 + upsilon) * upsilon;
    CMat s = CMat::Zero(cov.at(0).rows(), cov.at(0).cols());
    for (const auto& c : cov) s += c + imp * linalg::diag_part(c);
    return s;
}

// Lagrangian weight of one user's robust residual, normalized by the eve
// noise term: d1 (Tr Phi + c_hat + d2 sqrt(2L) a + (d3 L - d4) b) / n_e.
double robust_penalty(const FastRobust& f, const DualState& d, double lg, double noise_term) {
    return d.d[0] * (f.trace_phi + f.c_hat + d.d[1] * std::sqrt(2.0 * lg) * f.norm + (d.d[2] * lg - d.d[3]) * f.lam_max) /
           noise_term;
}

// Augmented phase vector [theta; 1].
CVec augmented(const CVec& theta) {
    CVec v(theta.size() + 1);
    v.head(theta.size()) = theta;
    v(theta.size()) = 1.0;
    return v;
}

// Quadratic-form matrix of Tr(H(theta) M H(theta)^H) in the augmented phase
// vector: Z_ab = Tr(F_b M F_a^H), F_j the per-element slices of G and
// F_J = h^H.
CMat phase_quadratic(const CMat& g, const CMat& h, const CMat& m, int bs) {
    const Eigen::Index j = g.cols() / bs;
    const Eigen::Index nrx = g.rows();
    CMat z = CMat::Zero(j + 1, j + 1);
    CMat x(j + 1, bs);
    for (Eigen::Index r = 0; r < nrx; ++r) {
        for (int b = 0; b < bs; ++b) {
            x.block(0, b, j, 1) = g.block(r, b * j, 1, j).transpose();
            x(j, b) = std::conj(h(b, r));
        }
        const CMat xc = x.conjugate();
        z.noalias() += xc * m.transpose() * x.transpose();
    }
    return z;
}

double merit(const Problem& p, const std::vector<CMat>& cov, const CVec& theta, const DualState& d) {
    const RateReport rep = secrecy_report(p.ch(), cov, theta, p.hw, p.noise, p.pairing);
    double v = 0.0;
    for (int k = 0; k < p.users(); ++k) v += (1.0 + d.psi(k)) * rep.rate_user(k) - rep.rate_eve(k);
    if (d.d[0] != 0.0) {
        const auto rob = robust_all_users(p.ch(), cov, theta, p.hw, p.uncertainty, p.noise, p.pairing, p.eps_eve,
                                          p.outage);
        const auto scale = robust_scales(p, cov, theta);
        const double lg = log_outage(p);
        for (std::size_t k = 0; k < rob.size(); ++k) v -= robust_penalty(rob[k], d, lg, scale[k]) / kLn2;
    }
    return v;
}

}  // namespace

Evaluation evaluate(const Problem& p, const AoState& s) {
    Evaluation ev;
    const auto cov = s.covariances(p.bs());
    const CVec theta = s.theta();
    ev.report = secrecy_report(p.ch(), cov, theta, p.hw, p.noise, p.pairing);
    ev.robust = robust_all_users(p.ch(), cov, theta, p.hw, p.uncertainty, p.noise, p.pairing, p.eps_eve, p.outage);
    ev.robust_scale = robust_scales(p, cov, theta);
    ev.objective = ev.report.sum_secrecy;
    for (const auto& c : cov) ev.power += linalg::real_trace(c);
    bool ok = ev.power <= p.power_budget * (1.0 + 1e-9);
    ev.violation = std::max(0.0, ev.power / p.power_budget - 1.0);
    for (int k = 0; k < p.users(); ++k) {
        const double margin = ev.report.rate_user(k) - p.eps_user;
        if (margin < 0.0) {
            ok = false;
            ev.violation += -margin;
        }
        const auto i = static_cast<std::size_t>(k);
        const double r = ev.robust[i].residual / ev.robust_scale[i];
        ev.robust_normalized.push_back(r);
        if (r > 0.0) {
            ok = false;
            ev.violation += r;
        }
    }
    ev.feasible = ok;
    return ev;
}

AoState power_backoff(const Problem& p, const AoState& s, const Evaluation& ev) {
    // every residual is affine in a common power scale: alpha * (r + n) - n
    const double n = (1.0 + p.hw.upsilon) * p.noise.eve * static_cast<double>(p.ch().h_be.at(0).cols());
    double alpha = 1.0;
    for (const auto& r : ev.robust)
        if (r.residual > 0.0) alpha = std::min(alpha, n / (r.residual + n));
    AoState out = s;
    if (alpha < 1.0)
        for (auto& q : out.q) q *= alpha * (1.0 - 1e-9);
    return out;
}

std::vector<CMat> kkt_beamforming_update(const Problem& p, const AoState& s, const DualState& duals,
                                         const AoConfig& cfg, NumericFlags& flags, double* requested_power) {
    const int k_users = p.users(), nb = p.bs(), ns = p.streams, n = nb * ns;
    const double u = p.hw.upsilon, imp = (1.0 + u) * u;
    auto cov = s.covariances(nb);
    const CVec theta = s.theta();
    const double eta = eta_eve(p.eps_eve);
    const double lg = log_outage(p);
    const double c = p.uncertainty.iota_direct * p.uncertainty.iota_direct +
                     p.uncertainty.iota_cascaded * p.uncertainty.iota_cascaded * p.ris();

    const auto links = objective_links(p);
    std::vector<CMat> rx_corr;
    std::vector<double> noise;
    for (const auto& l : links) {
        const CMat h = effective_channel(p.ch(), theta, l.eve ? Receiver::eavesdropper(l.rx) : Receiver::user(l.rx));
        rx_corr.push_back(h.adjoint() * h);
        noise.push_back(rx_noise(p, l));
    }
    std::vector<CMat> eve_corr;
    for (int e = 0; e < p.ch().num_eves(); ++e) {
        const CMat h = effective_channel(p.ch(), theta, Receiver::eavesdropper(e));
        eve_corr.push_back(h.adjoint() * h);
    }

    std::vector<CMat> out = s.q;
    double requested = 0.0;
    // Users are updated in turn; each sees the covariances already updated
    // earlier in the sweep.
    for (int k = 0; k < k_users; ++k) {
        const CMat load = loaded_sum(cov, u);
        CMat price = CMat::Zero(nb, nb);    // PSD costs
        CMat benefit = CMat::Zero(nb, nb);  // PSD gains, linearized
        CMat signal = CMat::Zero(nb, nb);
        double interference = 0.0;
        for (std::size_t li = 0; li < links.size(); ++li) {
            const Link& l = links[li];
            const CMat& r = rx_corr[li];
            const double sig = tr_prod(r, cov[static_cast<std::size_t>(l.msg)]);
            const double t_tot = tr_prod(r, load) + u * sig + noise[li];
            const double d_tot = t_tot - sig;
            const CMat load_grad = r + imp * linalg::diag_part(r);
            const CMat dist_grad = u * r + imp * linalg::diag_part(r);
            const double gap = 1.0 / d_tot - 1.0 / t_tot;
            const double w = link_weight(l, duals);
            if (!l.eve) {
                if (l.msg == k) {
                    signal = r;
                    interference = d_tot;
                    price += w * dist_grad * gap / kLn2;
                } else {
                    price += w * load_grad * gap / kLn2;
                }
            } else if (l.msg == k) {
                price += (load_grad + u * r) / (t_tot * kLn2);
                benefit += dist_grad / (d_tot * kLn2);
            } else {
                benefit += load_grad * gap / kLn2;
            }
        }
        if (duals.d[0] != 0.0) {
            for (int m = 0; m < k_users; ++m) {
                const auto mi = static_cast<std::size_t>(m);
                const CMat& hh = eve_corr[static_cast<std::size_t>(p.pairing[mi])];
                const double ne = static_cast<double>(p.ch().h_be.at(0).cols());
                const CMat om = omega_matrix(cov, m, p.hw, p.eps_eve);
                const SinrTerms st = [&] {
                    SinrTerms t;
                    t.signal = tr_prod(hh, cov[mi]);
                    t.noise = (1.0 + u) * p.noise.eve * ne;
                    return t;
                }();
                const double scale = tr_prod(hh, load) + u * st.signal + st.noise;
                CMat x = ne * c * CMat::Identity(nb, nb) + hh;
                const double a = std::sqrt(ne * c * c * om.squaredNorm() + 2.0 * c * tr_prod(om * om, hh));
                if (a > 0.0) x += duals.d[1] * std::sqrt(2.0 * lg) * (ne * c * c * om + c * (om * hh + hh * om)) / a;
                double lmax = 0.0;
                const CVec top = linalg::top_eigenvector(om, &lmax);
                if (c > 0.0 && lmax > 0.0) x += (duals.d[2] * lg - duals.d[3]) * c * (top * top.adjoint());
                x = duals.d[0] * linalg::hermitian_part(x) / (scale * kLn2);
                const CMat g = m == k ? CMat((eta - u) * x - imp * linalg::diag_part(x))
                                      : CMat(-(x + imp * linalg::diag_part(x)));
                // the robust gradient is indefinite; split it by eigen-sign
                Eigen::SelfAdjointEigenSolver<CMat> es(linalg::hermitian_part(g));
                const RVec ev = es.eigenvalues();
                price += es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().adjoint();
                benefit -= es.eigenvectors() * ev.cwiseMin(0.0).asDiagonal() * es.eigenvectors().adjoint();
            }
        }
        CMat cost = linalg::lift_streams(linalg::hermitian_part(price), ns) +
                    (duals.mu * CMat::Identity(n, n) + duals.xi.at(static_cast<std::size_t>(k))) / p.power_budget;
        cost = linalg::hermitian_part(cost);
        const double level = std::max(cost.diagonal().real().cwiseAbs().maxCoeff(), 1.0 / p.power_budget);
        const double floor = std::max(cfg.psd_floor, 1e-9 * level);
        if (linalg::lambda_min(cost) < floor) {
            ++flags.singular_price;
            cost = linalg::psd_project(cost, floor);
        }
        // Linearized gains are unbounded in power; they are shrunk so the net
        // price never drops below half the cost.
        const CMat gain = linalg::lift_streams(linalg::hermitian_part(benefit), ns);
        const double ratio = linalg::generalized_top(gain, cost).value;
        const double shrink = ratio > 0.5 ? 0.5 / ratio : 1.0;
        const CMat dbar = linalg::hermitian_part(cost - shrink * gain);
        const auto gt = linalg::generalized_top(linalg::lift_streams(signal, ns), dbar);
        // water-filling level, raised to the least power meeting r_k >= eps_k
        // under the current interference (capped at the budget)
        double power = 0.0;
        const double vn = gt.vector.squaredNorm();
        if (gt.value > 0.0 && vn > 0.0) {
            const double qos = (std::exp2(p.eps_user) - 1.0) * interference / gt.value;
            const double floor_qos = cfg.qos_floor ? std::min(qos, p.power_budget / vn) : 0.0;
            power = std::max({weight_of(duals, k) / kLn2 - interference / gt.value, floor_qos, 0.0});
        }
        CMat qk = linalg::hermitian_part(power * (gt.vector * gt.vector.adjoint()));
        const auto ki = static_cast<std::size_t>(k);
        if (cfg.beam_damping < 1.0) qk = (1.0 - cfg.beam_damping) * s.q[ki] + cfg.beam_damping * qk;
        if (cfg.gauss_seidel) cov[ki] = linalg::partial_trace_streams(qk, nb);
        out[ki] = std::move(qk);
    }
    for (const auto& qk : out) requested += linalg::real_trace(qk);
    if (requested_power) *requested_power = requested;
    if (requested > p.power_budget) {
        const double f = p.power_budget / requested;
        for (auto& qk : out) qk *= f;
    }
    return out;
}

RVec kkt_phase_update(const Problem& p, const AoState& s, const DualState& duals, const AoConfig& cfg,
                      NumericFlags& flags) {
    const int nb = p.bs(), j = p.ris();
    const double u = p.hw.upsilon;
    const auto cov = s.covariances(nb);
    const CVec theta = s.theta();
    const CVec tb = augmented(theta);
    const CMat load = loaded_sum(cov, u);

    CMat gamma = CMat::Zero(j + 1, j + 1);
    struct Term {
        CMat z;  // gradient contribution (already weighted)
        bool log_term;
    };
    std::vector<Term> terms;

    for (const auto& l : objective_links(p)) {
        const auto rx = static_cast<std::size_t>(l.rx);
        const CMat& g = l.eve ? p.ch().g_e.at(rx) : p.ch().g_k.at(rx);
        const CMat& h = l.eve ? p.ch().h_be.at(rx) : p.ch().h_bk.at(rx);
        const CMat z_load = phase_quadratic(g, h, load, nb);
        const CMat z_sig = phase_quadratic(g, h, cov[static_cast<std::size_t>(l.msg)], nb);
        const CMat z_t = z_load + u * z_sig;
        const CMat z_d = z_t - z_sig;
        const double noise = rx_noise(p, l);
        const double t = (tb.adjoint() * z_t * tb)(0, 0).real() + noise;
        const double d = (tb.adjoint() * z_d * tb)(0, 0).real() + noise;
        const double w = link_weight(l, duals);
        terms.push_back({w * (z_t / t - z_d / d) / kLn2, true});
    }
    if (duals.d[0] != 0.0) {
        const double lg = log_outage(p);
        const auto scale = robust_scales(p, cov, theta);
        const double c = p.uncertainty.iota_direct * p.uncertainty.iota_direct +
                         p.uncertainty.iota_cascaded * p.uncertainty.iota_cascaded * j;
        for (int m = 0; m < p.users(); ++m) {
            const auto e = static_cast<std::size_t>(p.pairing[static_cast<std::size_t>(m)]);
            const CMat om = omega_matrix(cov, m, p.hw, p.eps_eve);
            const CMat z_om = phase_quadratic(p.ch().g_e[e], p.ch().h_be[e], om, nb);
            CMat grad = z_om;
            const CMat h = effective_channel(p.ch(), theta, Receiver::eavesdropper(static_cast<int>(e)));
            const double ne = static_cast<double>(h.rows());
            const double a = std::sqrt(ne * c * c * om.squaredNorm() + 2.0 * c * (om * h.adjoint()).squaredNorm());
            if (a > 0.0) {
                const CMat z_om2 = phase_quadratic(p.ch().g_e[e], p.ch().h_be[e], om * om, nb);
                grad += duals.d[1] * std::sqrt(2.0 * lg) * c * z_om2 / a;
            }
            terms.push_back({-duals.d[0] * grad / (scale[static_cast<std::size_t>(m)] * kLn2), false});
        }
    }
    for (const auto& t : terms) gamma += t.z;
    gamma = linalg::hermitian_part(gamma);
    const double gnorm = gamma.norm();
    if (!(gnorm > 0.0) || !std::isfinite(gnorm)) return s.phases;

    const CMat dir = static_cast<double>(j + 1) * gamma / gnorm;
    double a = 0.0, b = 0.0;
    for (const auto& t : terms) {
        const double slope = tr_prod(t.z, dir) * kLn2;
        if (slope > 0.0)
            a += slope;
        else
            b -= slope;
    }
    const double y = std::max((tb.adjoint() * duals.upsilon * tb)(0, 0).real() / (j + 1), 0.0);
    const double nu = 1.0 / (1.0 + y);
    double step = 0.0;
    if (a > 0.0 && b > 0.0) {
        double rad = (a - b) * (a - b) + 4.0 * a * b / nu;
        if (rad < 0.0) {
            ++flags.negative_radicand;
            rad = 0.0;
        }
        step = (std::sqrt(rad) - (a + b)) / (2.0 * a * b);
    } else if (a > 0.0) {
        step = (1.0 / nu - 1.0) / a;
    }
    if (!(step > 0.0) || !std::isfinite(step)) return s.phases;

    const CMat abar = tb * tb.adjoint();
    const double base = merit(p, cov, theta, duals);
    auto trial = [&](double st, RVec& phases) {
        const CVec v = linalg::top_eigenvector(linalg::psd_project(abar + st * dir, 0.0));
        const double ref = std::arg(v(j));
        phases.resize(j);
        CVec th(j);
        for (int m = 0; m < j; ++m) {
            phases(m) = std::remainder(std::arg(v(m)) - ref, 2.0 * kPi);
            th(m) = std::polar(1.0, phases(m));
        }
        return merit(p, cov, th, duals);
    };
    // the root step comes from a linear model and is often short when the
    // cascaded link is weak, so grow it while the merit keeps improving
    RVec best_ph, ph;
    double best_val = trial(step, best_ph);
    if (best_val >= base) {
        for (int g = 0; g < cfg.backtracks; ++g) {
            step *= 2.0;
            const double v = trial(step, ph);
            if (v <= best_val) break;
            best_val = v;
            best_ph = ph;
        }
        return best_ph;
    }
    for (int bt = 0; bt < cfg.backtracks; ++bt) {
        step *= 0.5;
        if (trial(step, ph) >= base) return ph;
    }
    ++flags.phase_rejected;
    return s.phases;
}

AoState primal_step(const Problem& p, const AoState& s, const DualState& duals, const AoConfig& cfg,
                    NumericFlags& flags, StepInfo* info) {
    AoState next;
    next.q = s.q;
    next.phases = kkt_phase_update(p, s, duals, cfg, flags);
    double req = 0.0;
    next.q = kkt_beamforming_update(p, next, duals, cfg, flags, &req);
    if (info) info->requested_power = req;
    return next;
}

DualState dual_update(const Problem& p, const DualState& duals, const AoState& s, const Evaluation& ev,
                      const StepInfo& info, double step, const AoConfig& cfg) {
    if (!(step > 0.0)) throw Error(ErrorKind::Config, "dual step must be positive");
    DualState d = duals;
    const double c = cfg.residual_clip;
    d.mu = std::max(0.0, d.mu + step * clip(info.requested_power / p.power_budget - 1.0, c));
    for (std::size_t k = 0; k < d.xi.size(); ++k)
        d.xi[k] = linalg::psd_project(d.xi[k] - step * s.q.at(k) / p.power_budget, 0.0);
    const CVec tb = augmented(s.theta());
    d.upsilon = linalg::psd_project(d.upsilon - step * (tb * tb.adjoint()) / static_cast<double>(tb.size()), 0.0);

    double worst = -c, worst_b = -c;
    for (std::size_t k = 0; k < ev.robust.size(); ++k) {
        worst = std::max(worst, clip(ev.robust_normalized[k], c));
        worst_b = std::max(worst_b, clip(-ev.robust[k].lam_max / ev.robust_scale[k], c));
    }
    if (!ev.robust.empty()) {
        d.d[0] = std::max(0.0, d.d[0] + step * worst);
        // the norm and eigenvalue inequalities hold with equality at tight
        // slacks, so their multipliers see zero residual
        d.d[3] = std::max(0.0, d.d[3] + step * worst_b);
    }
    for (int k = 0; k < p.users(); ++k)
        d.psi(k) = std::clamp(d.psi(k) + cfg.qos_step * step * clip(p.eps_user - ev.report.rate_user(k), c), 0.0,
                             cfg.psi_max);
    return d;
}

AoState ao_iteration(const Problem& p, const AoState& s, DualState& duals, int t, const AoConfig& cfg,
                     NumericFlags& flags) {
    StepInfo info;
    AoState next = primal_step(p, s, duals, cfg, flags, &info);
    const Evaluation ev = evaluate(p, next);
    duals = dual_update(p, duals, next, ev, info, cfg.step0 / std::sqrt(static_cast<double>(t)), cfg);
    return next;
}

Design extract_design(const Problem& p, const AoState& s, std::vector<double>* gaps) {
    Design d;
    const int nb = p.bs(), ns = p.streams;
    for (const auto& qk : s.q) {
        const auto r1 = linalg::rank_one_extract(linalg::hermitian_part(qk));
        CMat w(nb, ns);
        for (int c = 0; c < ns; ++c) w.col(c) = r1.vector.segment(c * nb, nb);
        d.w.push_back(w);
        if (gaps) gaps->push_back(r1.gap);
    }
    d.phases = s.phases;
    if (gaps) gaps->push_back(0.0);  // A = [theta;1][theta;1]^H is rank one by construction
    return d;
}

namespace {

AoState state_from_design(const Design& d) {
    AoState s;
    for (const auto& w : d.w) {
        const CVec v = Eigen::Map<const CVec>(w.data(), w.size());
        s.q.push_back(v * v.adjoint());
    }
    s.phases = d.phases;
    return s;
}

// feasible iterates first; otherwise the exact-penalty value with the
// multiplier bound as the price of each unit of violation
bool better(const Evaluation& cand, const Evaluation& best, double price) {
    if (cand.feasible != best.feasible) return cand.feasible;
    if (cand.feasible) return cand.objective > best.objective;
    return cand.objective - price * cand.violation > best.objective - price * best.violation;
}

}  // namespace

AoResult ao_solve(const Problem& p, const AoConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    AoResult res;
    AoState state = AoState::initial(p);
    DualState duals = DualState::initial(p);
    Evaluation best_ev = evaluate(p, state);
    AoState best = state;
    // objective history, so slow steady drift is not mistaken for convergence
    std::vector<double> hist{best_ev.objective};
    int calm = 0;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        StepInfo info;
        state = primal_step(p, state, duals, cfg, res.flags, &info);
        const Evaluation ev = evaluate(p, state);
        duals = dual_update(p, duals, state, ev, info, cfg.step0 / std::sqrt(static_cast<double>(t)), cfg);
        res.trace.push_back(ev.objective);
        res.iters = t;
        if (cfg.keep_trace_rows) {
            IterationRecord row;
            row.iter = t;
            row.objective = ev.objective;
            row.power = ev.power;
            row.violation = ev.violation;
            row.feasible = ev.feasible;
            row.mu = duals.mu;
            row.d1 = duals.d[0];
            for (std::size_t k = 0; k < state.q.size(); ++k)
                row.xi_slack += (duals.xi[k] * state.q[k]).norm() / p.power_budget;
            res.rows.push_back(row);
        }
        if (better(ev, best_ev, 1.0 + cfg.psi_max)) {
            best_ev = ev;
            best = state;
            res.best_iter = t;
        }
        if (!ev.feasible) {
            const AoState low = power_backoff(p, state, ev);
            const Evaluation lev = evaluate(p, low);
            if (lev.feasible && better(lev, best_ev, 1.0 + cfg.psi_max)) {
                best_ev = lev;
                best = low;
                res.best_iter = t;
            }
        }
        const double prev = hist.back();
        calm = std::abs(ev.objective - prev) < cfg.tolerance * std::max(1.0, std::abs(prev)) ? calm + 1 : 0;
        hist.push_back(ev.objective);
        if (calm >= cfg.patience) {
            const double past = hist[hist.size() - 1 - static_cast<std::size_t>(cfg.patience)];
            if (std::abs(ev.objective - past) < cfg.tolerance * std::max(1.0, std::abs(past))) break;
        }
    }
    res.design = extract_design(p, best, &res.rank_gap);
    const Evaluation fin = evaluate(p, state_from_design(res.design));
    res.report = fin.report;
    res.feasible = fin.feasible;
    res.violation = fin.violation;
    res.worst_residuals = fin.robust_normalized;
    res.min_rate_margin = (fin.report.rate_user.array() - p.eps_user).minCoeff();
    res.duals = duals;
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::string IterationRecord::csv_header() { return "iter,objective,power,violation,feasible,mu,d1,xi_slack"; }

std::string IterationRecord::csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << iter << ',' << objective << ',' << power << ',' << violation << ',' << (feasible ? 1 : 0) << ',' << mu << ','
       << d1 << ',' << xi_slack;
    return os.str();
}

namespace {

nlohmann::json matrix_json(const CMat& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            data.push_back(m(r, c).real());
            data.push_back(m(r, c).imag());
        }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

CMat matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != 2 * rows * cols)
        throw Error(ErrorKind::Dimension, "matrix data length does not match its shape");
    CMat m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r, i += 2) m(r, c) = cd(data[i].get<double>(), data[i + 1].get<double>());
    return m;
}

}  // namespace

nlohmann::json design_to_json(const Design& d) {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& m : d.w) w.push_back(matrix_json(m));
    return {{"w", w}, {"phases", std::vector<double>(d.phases.data(), d.phases.data() + d.phases.size())}};
}

Design design_from_json(const nlohmann::json& j) {
    Design d;
    for (const auto& m : j.at("w")) d.w.push_back(matrix_from_json(m));
    const auto ph = j.at("phases").get<std::vector<double>>();
    d.phases = Eigen::Map<const RVec>(ph.data(), static_cast<Eigen::Index>(ph.size()));
    return d;
}

nlohmann::json to_json(const AoResult& r) {
    nlohmann::json j;
    j["design"] = design_to_json(r.design);
    j["sum_secrecy"] = r.report.sum_secrecy;
    j["sum_secrecy_clipped"] = r.report.sum_secrecy_clipped;
    j["rate_user"] = std::vector<double>(r.report.rate_user.data(), r.report.rate_user.data() + r.report.rate_user.size());
    j["rate_eve"] = std::vector<double>(r.report.rate_eve.data(), r.report.rate_eve.data() + r.report.rate_eve.size());
    j["trace"] = r.trace;
    j["iters"] = r.iters;
    j["best_iter"] = r.best_iter;
    j["wall_time"] = r.wall_time;
    j["rank_gap"] = r.rank_gap;
    j["feasible"] = r.feasible;
    j["violation"] = r.violation;
    j["robust_residuals"] = r.worst_residuals;
    j["min_rate_margin"] = r.min_rate_margin;
    j["flags"] = {{"singular_price", r.flags.singular_price},
                  {"negative_radicand", r.flags.negative_radicand},
                  {"phase_rejected", r.flags.phase_rejected}};
    return j;
}

nlohmann::json to_json(const AoConfig& c) {
    return {{"max_iters", c.max_iters},
            {"tolerance", c.tolerance},
            {"patience", c.patience},
            {"step0", c.step0},
            {"psd_floor", c.psd_floor},
            {"residual_clip", c.residual_clip},
            {"backtracks", c.backtracks},
            {"qos_step", c.qos_step},
            {"psi_max", c.psi_max},
            {"beam_damping", c.beam_damping},
            {"gauss_seidel", c.gauss_seidel},
            {"qos_floor", c.qos_floor},
            {"keep_trace_rows", c.keep_trace_rows}};
}

AoConfig ao_config_from_json(const nlohmann::json& j) {
    static const char* known[] = {"max_iters", "tolerance", "patience", "step0", "psd_floor", "residual_clip",
                                  "backtracks", "qos_step", "psi_max", "beam_damping", "gauss_seidel",
                                  "qos_floor", "keep_trace_rows"};
    if (!j.is_object()) throw Error(ErrorKind::Config, "ao config must be an object");
    for (const auto& [key, _] : j.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known))
            throw Error(ErrorKind::Config, "unknown ao config key: " + key);
    AoConfig c;
    c.max_iters = j.value("max_iters", c.max_iters);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.patience = j.value("patience", c.patience);
    c.step0 = j.value("step0", c.step0);
    c.psd_floor = j.value("psd_floor", c.psd_floor);
    c.residual_clip = j.value("residual_clip", c.residual_clip);
    c.backtracks = j.value("backtracks", c.backtracks);
    c.qos_step = j.value("qos_step", c.qos_step);
    c.psi_max = j.value("psi_max", c.psi_max);
    c.beam_damping = j.value("beam_damping", c.beam_damping);
    c.gauss_seidel = j.value("gauss_seidel", c.gauss_seidel);
    c.qos_floor = j.value("qos_floor", c.qos_floor);
    c.keep_trace_rows = j.value("keep_trace_rows", c.keep_trace_rows);
    c.validate();
    return c;
}

}  // namespace risec
