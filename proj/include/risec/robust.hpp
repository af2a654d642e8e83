#pragma once

#include <array>
#include <string>
#include <vector>

#include "risec/channel.hpp"
#include "risec/metrics.hpp"

namespace risec {

/// eta_e: the eavesdropper SINR constraint gamma_e <= 2^{eps_e} - 1 written as
/// eta_e * signal - (interference + distortion) - noise <= 0.
double eta_eve(double eps_eve);

/// Omega_k = eta_e C_k - sum_{j != k} (C_j + (1+u)u diag C_j) - (u C_k + (1+u)u diag C_k).
CMat omega_matrix(const std::vector<CMat>& cov, int k, const HardwareProfile& hw, double eps_eve);
/// Tr(Omega_k).
double omega(const std::vector<CMat>& cov, int k, const HardwareProfile& hw, double eps_eve);

/// Quadratic-form data of the eavesdropper constraint of one user:
///   f(g) = g^H Phi g + 2 Re{B^H g} + c_hat <= 0
/// with g the stacked standard-Gaussian channel error.
struct BernsteinTerms {
    CMat phi;
    CVec b;
    double c_hat = 0.0;
    CMat omega;  // N_B x N_B
    int eve = 0;
};

BernsteinTerms bernstein_terms(const ChannelSet& estimates, const std::vector<CMat>& cov, const CVec& theta,
                               const HardwareProfile& hw, const UncertaintyModel& u, double noise_eve,
                               double eps_eve, int eve, int user);

/// Stacked error vector g matching BernsteinTerms for unit-level draws
/// (d_h = g_1, d_g = g_2 before scaling by iota).
CVec stack_error(const EveError& unit_draw);

double quadratic_form(const BernsteinTerms& t, const CVec& g);

struct SlackState {
    double a = 0.0;
    double b = 0.0;
    double outage = 0.05;
};

/// Smallest slacks satisfying the norm and eigenvalue inequalities.
SlackState tight_slacks(const BernsteinTerms& t, double outage);

/// (trace inequality, norm inequality, eigenvalue inequality); each <= 0 when
/// satisfied. The eigenvalue residual is -lambda_min(b I - Phi).
std::array<double, 3> bernstein_residuals(const BernsteinTerms& t, const SlackState& s);

bool certified(const std::array<double, 3>& r, const SlackState& s);

/// Closed-form evaluation of the same residuals through N_B x N_B quantities,
/// valid for unit-modulus theta: every trace/norm/eigen term of Phi scales with
/// c = iota_1^2 + iota_2^2 J.
struct FastRobust {
    double trace_phi = 0.0;
    double norm = 0.0;     // tight slack a
    double lam_max = 0.0;  // tight slack b
    double c_hat = 0.0;
    double residual = 0.0;  // trace inequality at tight slacks
};

FastRobust robust_fast(const CMat& omega, const CMat& h_hat, const UncertaintyModel& u, int ris_elements,
                       double upsilon, double noise_eve, double outage);

/// Robust residual (trace inequality at tight slacks) for every user.
std::vector<FastRobust> robust_all_users(const ChannelSet& estimates, const std::vector<CMat>& cov, const CVec& theta,
                                         const HardwareProfile& hw, const UncertaintyModel& u,
                                         const NoiseLevels& noise, const std::vector<int>& pairing, double eps_eve,
                                         double outage);

struct ViolationReport {
    std::vector<double> per_user;  // empirical P(r_e > eps_e) for each user's message
    int trials = 0;
    int worst_user = 0;
    double empirical = 0.0;  // worst user
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double iota_direct = 0.0;
    double iota_cascaded = 0.0;
    double outage = 0.0;

    static std::string csv_header();
    std::string csv_row() const;
};

std::array<double, 2> wilson_interval(int successes, int trials, double z = 1.959963984540054);

ViolationReport mc_violation(const ChannelSet& estimates, const std::vector<CMat>& cov, const CVec& theta,
                             const HardwareProfile& hw, const UncertaintyModel& u, const NoiseLevels& noise,
                             const std::vector<int>& pairing, double eps_eve, int trials, Rng& rng);

}  // namespace risec
