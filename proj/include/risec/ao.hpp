#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "risec/channel.hpp"
#include "risec/metrics.hpp"
#include "risec/robust.hpp"
#include "risec/scene.hpp"

namespace risec {

/// Everything the optimizer reads but never changes.
struct Problem {
    const ChannelSet* channels = nullptr;
    HardwareProfile hw;
    UncertaintyModel uncertainty;
    NoiseLevels noise;
    std::vector<int> pairing;
    double power_budget = 1.0;
    double eps_user = 2.0;
    double eps_eve = 1.0;
    double outage = 0.05;
    int streams = 1;  // N_K

    const ChannelSet& ch() const { return *channels; }
    int users() const { return channels->num_users(); }
    int bs() const { return channels->bs_antennas(); }
    int ris() const { return channels->ris_elements(); }
    int lifted_dim() const { return bs() * streams; }
};

Problem make_problem(const Scene& scene, const ChannelSet& channels, const HardwareProfile& hw,
                     const UncertaintyModel& u);

/// Primal iterate: lifted covariances Q_k and RIS phases.
struct AoState {
    std::vector<CMat> q;
    RVec phases;

    CVec theta() const;
    std::vector<CMat> covariances(int bs_antennas) const;
    /// Q_k = P_B / (K N_B N_K) I, omega = 0.
    static AoState initial(const Problem& p);
};

struct DualState {
    double mu = 1.0;
    std::vector<CMat> xi;  // per user, lifted dimension
    CMat upsilon;          // (J+1) x (J+1)
    std::array<double, 4> d{1.0, 1.0, 1.0, 1.0};
    RVec psi;  // QoS multipliers, one per user

    static DualState initial(const Problem& p);
    bool finite() const;
};

struct AoConfig {
    int max_iters = 500;
    double tolerance = 1e-3;  // on |delta sum secrecy| relative to max(1, |sum secrecy|)
    double step0 = 0.1;       // dual step s0 / sqrt(t)
    int patience = 5;         // consecutive calm iterations before stopping
    double psd_floor = 1e-12;
    double residual_clip = 2.0;  // normalized residuals enter the dual step clipped to +-this
    int backtracks = 6;
    double qos_step = 10.0;  // relative step of the QoS multipliers
    double psi_max = 5.0;    // bound on the QoS multipliers (exact-penalty price)
    double beam_damping = 1.0;  // Q <- (1-tau) Q + tau Q_update inside the beam step
    bool gauss_seidel = false;  // users see covariances updated earlier in the sweep
    bool qos_floor = false;     // raise each user's power to meet eps_k under current interference
    bool keep_trace_rows = false;

    void validate() const;
};

struct NumericFlags {
    int singular_price = 0;
    int negative_radicand = 0;
    int phase_rejected = 0;
    int total() const { return singular_price + negative_radicand + phase_rejected; }
    NumericFlags& operator+=(const NumericFlags& o);
};

/// Objective and constraint status of one iterate.
struct Evaluation {
    RateReport report;
    std::vector<FastRobust> robust;
    std::vector<double> robust_scale;       // nominal received power at the paired eve
    std::vector<double> robust_normalized;  // residual / robust_scale
    double objective = 0.0;                 // sum secrecy (unclipped)
    double power = 0.0;
    double violation = 0.0;  // total normalized constraint violation
    bool feasible = false;
};

Evaluation evaluate(const Problem& p, const AoState& s);

/// Common down-scaling of every Q_k to the largest level at which all robust
/// residuals hold (they are affine in the scale); identity when they already do.
AoState power_backoff(const Problem& p, const AoState& s, const Evaluation& ev);

/// Beam update: per-user generalized top eigenvector of (signal, price) with
/// water-filling power, then a common scale into the power budget.
std::vector<CMat> kkt_beamforming_update(const Problem& p, const AoState& s, const DualState& duals,
                                         const AoConfig& cfg, NumericFlags& flags, double* requested_power = nullptr);

/// Phase update on the lifted A = [theta;1][theta;1]^H: ascent step of size
/// set by the secrecy root and the Upsilon price, PSD projection, dominant
/// eigenvector, unit-modulus phases.
RVec kkt_phase_update(const Problem& p, const AoState& s, const DualState& duals, const AoConfig& cfg,
                      NumericFlags& flags);

struct StepInfo {
    double requested_power = 0.0;
};

/// One primal sweep: phase update then beam update. Shared by AO and DUNet.
AoState primal_step(const Problem& p, const AoState& s, const DualState& duals, const AoConfig& cfg,
                    NumericFlags& flags, StepInfo* info = nullptr);

/// Projected subgradient ascent on every multiplier.
DualState dual_update(const Problem& p, const DualState& duals, const AoState& s, const Evaluation& ev,
                      const StepInfo& info, double step, const AoConfig& cfg);

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;
    double power = 0.0;
    double violation = 0.0;
    bool feasible = false;
    double mu = 0.0;
    double d1 = 0.0;
    double xi_slack = 0.0;  // sum_k ||Xi_k Q_k||_F / P_B

    static std::string csv_header();
    std::string csv_row() const;
};

struct AoResult {
    Design design;
    RateReport report;
    std::vector<double> trace;  // objective after every iteration
    std::vector<IterationRecord> rows;
    int iters = 0;
    double wall_time = 0.0;
    std::vector<double> rank_gap;  // per Q_k, then A
    bool feasible = false;
    double violation = 0.0;
    std::vector<double> worst_residuals;  // robust (normalized) per user
    double min_rate_margin = 0.0;         // min_k r_k - eps_k
    int best_iter = 0;
    NumericFlags flags;
    DualState duals;
};

/// One full AO iteration (primal sweep + dual update); exposed for the
/// core-sharing check against a DUNet layer.
AoState ao_iteration(const Problem& p, const AoState& s, DualState& duals, int t, const AoConfig& cfg,
                     NumericFlags& flags);

AoResult ao_solve(const Problem& p, const AoConfig& cfg = {});

/// Physical design from a (possibly higher-rank) state: dominant rank-one
/// factor of each Q_k reshaped to N_B x N_K, phases as given.
Design extract_design(const Problem& p, const AoState& s, std::vector<double>* gaps = nullptr);

nlohmann::json to_json(const AoResult& r);
nlohmann::json design_to_json(const Design& d);
Design design_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AoConfig& c);
AoConfig ao_config_from_json(const nlohmann::json& j);

}  // namespace risec
