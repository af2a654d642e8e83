#include "risec/robust.hpp"

#include <cmath>
#include <sstream>

#include "risec/linalg.hpp"

namespace risec {

double eta_eve(double eps_eve) { return 1.0 / (std::exp2(eps_eve) - 1.0); }

CMat omega_matrix(const std::vector<CMat>& cov, int k, const HardwareProfile& hw, double eps_eve) {
    const double u = hw.upsilon;
    const double imp = (1.0 + u) * u;
    const CMat& ck = cov.at(static_cast<std::size_t>(k));
    CMat om = eta_eve(eps_eve) * ck - (u * ck + imp * linalg::diag_part(ck));
    for (std::size_t j = 0; j < cov.size(); ++j) {
        if (static_cast<int>(j) == k) continue;
        om -= cov[j] + imp * linalg::diag_part(cov[j]);
    }
    return linalg::hermitian_part(om);
}

double omega(const std::vector<CMat>& cov, int k, const HardwareProfile& hw, double eps_eve) {
    return linalg::real_trace(omega_matrix(cov, k, hw, eps_eve));
}

BernsteinTerms bernstein_terms(const ChannelSet& est, const std::vector<CMat>& cov, const CVec& theta,
                               const HardwareProfile& hw, const UncertaintyModel& u, double noise_eve,
                               double eps_eve, int eve, int user) {
    const int nb = est.bs_antennas();
    const Eigen::Index j = theta.size();
    const auto e = static_cast<std::size_t>(eve);
    const CMat& h = est.h_be.at(e);
    const CMat& g = est.g_e.at(e);
    if (h.rows() != nb || g.cols() != nb * j || static_cast<int>(cov.size()) != est.num_users())
        throw Error(ErrorKind::Dimension, "bernstein_terms: inconsistent estimate dimensions");
    const Eigen::Index ne = h.cols();

    BernsteinTerms t;
    t.eve = eve;
    t.omega = omega_matrix(cov, user, hw, eps_eve);
    const CMat lift = lifted_phase(theta, nb);  // Theta 1_F
    const CMat h_hat = h.adjoint() + g * lift;  // N_E x N_B

    const Eigen::Index blk = nb + nb * j;
    CMat l(blk, nb);
    l.topRows(nb) = u.iota_direct * CMat::Identity(nb, nb);
    l.bottomRows(nb * j) = u.iota_cascaded * lift;
    const CMat block = l * t.omega * l.adjoint();

    t.phi = CMat::Zero(ne * blk, ne * blk);
    t.b = CVec::Zero(ne * blk);
    for (Eigen::Index r = 0; r < ne; ++r) {
        t.phi.block(r * blk, r * blk, blk, blk) = block;
        t.b.segment(r * blk, blk) = l * (t.omega * h_hat.row(r).adjoint());
    }
    t.c_hat = (h_hat * t.omega * h_hat.adjoint()).trace().real() -
              (1.0 + hw.upsilon) * noise_eve * static_cast<double>(ne);
    return t;
}

CVec stack_error(const EveError& d) {
    const Eigen::Index nb = d.d_h.rows(), ne = d.d_h.cols(), nbj = d.d_g.cols();
    const Eigen::Index blk = nb + nbj;
    CVec g(ne * blk);
    for (Eigen::Index r = 0; r < ne; ++r) {
        g.segment(r * blk, nb) = d.d_h.col(r);
        g.segment(r * blk + nb, nbj) = d.d_g.row(r).adjoint();
    }
    return g;
}

double quadratic_form(const BernsteinTerms& t, const CVec& g) {
    return (g.adjoint() * t.phi * g)(0, 0).real() + 2.0 * t.b.dot(g).real() + t.c_hat;
}

SlackState tight_slacks(const BernsteinTerms& t, double outage) {
    SlackState s;
    s.outage = outage;
    s.a = std::sqrt(t.phi.squaredNorm() + 2.0 * t.b.squaredNorm());
    s.b = std::max(linalg::lambda_max(t.phi), 0.0);
    return s;
}

std::array<double, 3> bernstein_residuals(const BernsteinTerms& t, const SlackState& s) {
    if (!(s.outage > 0.0 && s.outage < 1.0)) throw Error(ErrorKind::Config, "outage must lie in (0,1)");
    const double lg = std::log(1.0 / s.outage);
    const double n = t.phi.rows();
    std::array<double, 3> r{};
    r[0] = linalg::real_trace(t.phi) + std::sqrt(2.0 * lg) * s.a + lg * s.b + t.c_hat;
    r[1] = std::sqrt(t.phi.squaredNorm() + 2.0 * t.b.squaredNorm()) - s.a;
    r[2] = n > 0 ? -linalg::lambda_min(s.b * CMat::Identity(t.phi.rows(), t.phi.cols()) - t.phi) : -s.b;
    return r;
}

bool certified(const std::array<double, 3>& r, const SlackState& s) {
    return r[0] <= 0.0 && r[1] <= 0.0 && r[2] <= 0.0 && s.b >= 0.0;
}

FastRobust robust_fast(const CMat& om, const CMat& h_hat, const UncertaintyModel& u, int ris_elements,
                       double upsilon, double noise_eve, double outage) {
    const double c = u.iota_direct * u.iota_direct + u.iota_cascaded * u.iota_cascaded * ris_elements;
    const double ne = static_cast<double>(h_hat.rows());
    const double lg = std::log(1.0 / outage);
    FastRobust f;
    f.trace_phi = ne * c * linalg::real_trace(om);
    const CMat oh = om * h_hat.adjoint();
    f.norm = std::sqrt(ne * c * c * om.squaredNorm() + 2.0 * c * oh.squaredNorm());
    f.lam_max = c > 0.0 ? std::max(c * linalg::lambda_max(om), 0.0) : 0.0;
    f.c_hat = (h_hat * oh).trace().real() - (1.0 + upsilon) * noise_eve * ne;
    f.residual = f.trace_phi + std::sqrt(2.0 * lg) * f.norm + lg * f.lam_max + f.c_hat;
    return f;
}

std::vector<FastRobust> robust_all_users(const ChannelSet& est, const std::vector<CMat>& cov, const CVec& theta,
                                         const HardwareProfile& hw, const UncertaintyModel& u,
                                         const NoiseLevels& noise, const std::vector<int>& pairing, double eps_eve,
                                         double outage) {
    std::vector<CMat> h_hat;
    for (int e = 0; e < est.num_eves(); ++e) h_hat.push_back(effective_channel(est, theta, Receiver::eavesdropper(e)));
    std::vector<FastRobust> out;
    for (int k = 0; k < est.num_users(); ++k) {
        const CMat om = omega_matrix(cov, k, hw, eps_eve);
        out.push_back(robust_fast(om, h_hat.at(static_cast<std::size_t>(pairing.at(static_cast<std::size_t>(k)))), u,
                                  est.ris_elements(), hw.upsilon, noise.eve, outage));
    }
    return out;
}

std::array<double, 2> wilson_interval(int successes, int trials, double z) {
    if (trials <= 0) return {0.0, 1.0};
    const double n = trials;
    const double p = successes / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    // the bounds are exact at the ends; rounding would leave a 1e-18 residue
    return {successes == 0 ? 0.0 : std::max(0.0, center - half), successes == trials ? 1.0 : std::min(1.0, center + half)};
}

ViolationReport mc_violation(const ChannelSet& est, const std::vector<CMat>& cov, const CVec& theta,
                             const HardwareProfile& hw, const UncertaintyModel& u, const NoiseLevels& noise,
                             const std::vector<int>& pairing, double eps_eve, int trials, Rng& rng) {
    if (trials < 1) throw Error(ErrorKind::Config, "mc_violation needs at least one trial");
    const int k_users = est.num_users();
    std::vector<int> hits(static_cast<std::size_t>(k_users), 0);
    for (int t = 0; t < trials; ++t) {
        std::vector<CMat> h_eve;
        for (int e = 0; e < est.num_eves(); ++e) {
            const auto i = static_cast<std::size_t>(e);
            const EveError err = sample_eve_error(est.h_be[i], est.g_e[i], u, rng);
            const CMat h = (est.h_be[i] + err.d_h).adjoint() + apply_cascade(est.g_e[i] + err.d_g, theta, est.bs_antennas());
            h_eve.push_back(h);
        }
        for (int k = 0; k < k_users; ++k) {
            const int e = pairing.at(static_cast<std::size_t>(k));
            const double g = sinr_terms(h_eve[static_cast<std::size_t>(e)], cov, k, hw.upsilon, noise.eve).sinr();
            if (rate_from_sinr(g) > eps_eve) ++hits[static_cast<std::size_t>(k)];
        }
    }
    ViolationReport rep;
    rep.trials = trials;
    rep.iota_direct = u.iota_direct;
    rep.iota_cascaded = u.iota_cascaded;
    int worst = 0;
    for (int k = 0; k < k_users; ++k) {
        rep.per_user.push_back(static_cast<double>(hits[static_cast<std::size_t>(k)]) / trials);
        if (hits[static_cast<std::size_t>(k)] > hits[static_cast<std::size_t>(worst)]) worst = k;
    }
    rep.worst_user = worst;
    rep.empirical = rep.per_user.empty() ? 0.0 : rep.per_user[static_cast<std::size_t>(worst)];
    const auto ci = wilson_interval(hits.empty() ? 0 : hits[static_cast<std::size_t>(worst)], trials);
    rep.ci_lo = ci[0];
    rep.ci_hi = ci[1];
    return rep;
}

std::string ViolationReport::csv_header() { return "iota_direct,iota_cascaded,outage,empirical,ci_lo,ci_hi"; }

std::string ViolationReport::csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << iota_direct << ',' << iota_cascaded << ',' << outage << ',' << empirical << ',' << ci_lo << ',' << ci_hi;
    return os.str();
}

}  // namespace risec
