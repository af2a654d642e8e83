#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "risec/ao.hpp"

namespace risec {

/// Exhaustive grid over quantized phases and a parametric beam family:
/// every user picks one of three directions toward its effective channel
/// (matched filter, zero-forcing against the other users, secrecy
/// generalized eigenvector against its eavesdropper) and the powers lie on
/// a simplex grid with slack, p_k = u_k / power_steps * P_B with sum u_k <= power_steps.
/// A point that breaks the robust constraint is scaled down to its boundary.
struct OracleConfig {
    int phase_levels = 16;
    int power_steps = 16;
    double max_points = 1e8;

    static constexpr int kDirections = 3;
    static constexpr int kMaxUsers = 2, kMaxEves = 2, kMaxBs = 2, kMaxRis = 6;

    void validate() const;
};

/// Number of grid points for an instance; throws CapExceeded when an
/// instance cap is violated.
double oracle_points(const Problem& p, const OracleConfig& cfg);

struct OracleResult {
    bool found = false;  // some grid point met every constraint
    double objective = 0.0;
    Design design;
    RateReport report;
    std::vector<double> robust_residuals;
    std::vector<int> phase_digits;
    std::vector<int> directions;
    std::vector<int> power_units;
    double power_scale = 1.0;  // robust pullback applied to the power units
    long long visited = 0;
    long long feasible_points = 0;
    double wall_time = 0.0;
};

/// Deterministic exhaustive search; ties keep the earliest grid index.
OracleResult grid_search(const Problem& p, const OracleConfig& cfg = {});

struct GapReport {
    double objective_a = 0.0;
    double objective_b = 0.0;
    double relative_gap = 0.0;  // (b - a) / max(|b|, 1e-12): positive when a falls short of b
    bool feasible_a = false;
    bool feasible_b = false;
};

GapReport compare(double objective_a, bool feasible_a, double objective_b, bool feasible_b);

nlohmann::json to_json(const OracleResult& r, const OracleConfig& cfg);
nlohmann::json to_json(const GapReport& g);

}  // namespace risec
