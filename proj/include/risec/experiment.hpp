#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "risec/dunet.hpp"

namespace risec {

enum class ExperimentKind { PowerSweep, RisSweep, ThresholdSweep, TimingSweep, Train, Validate };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct Experiment {
    ExperimentKind kind = ExperimentKind::PowerSweep;
    int users = 8;
    int eves = 4;
    nlohmann::json scene_overrides = nlohmann::json::object();  // merged into the default scene
    std::vector<double> grid;  // dBm, RIS elements, eps_k or K depending on kind
    int trials = 20;
    std::uint64_t seed = 1;
    double upsilon = 0.0;
    double rel_direct = 0.05;  // eve CSI error relative to the estimate RMS
    double rel_cascaded = 0.05;
    int workers = 1;
    int train_size = 256;
    int val_size = 64;
    std::string out_dir = "out";
    AoConfig ao;
    TrainConfig train;

    /// Grid and scenario of the corresponding figure-style sweep.
    static Experiment defaults(ExperimentKind kind);
    void validate() const;  // grid nonempty, trials >= 1
};

nlohmann::json to_json(const Experiment& e);
/// Missing fields keep the defaults of the given kind.
Experiment experiment_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const Experiment& e);

/// Scene of one (grid value, trial) cell.
Scene trial_scene(const Experiment& e, double x, int trial);
std::uint64_t trial_channel_seed(const Experiment& e, int trial);
Problem trial_problem(const Experiment& e, const Scene& s, const ChannelSet& ch);

Sample make_sample(const Scene& s, std::uint64_t channel_seed, double upsilon, double rel_direct,
                   double rel_cascaded);

/// Rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// RIS element count to a near-square (jx, jz) factorization with jx >= jz.
std::pair<int, int> ris_shape(int elements);

struct TrialRecord {
    double x = 0.0;
    int trial = 0;
    std::uint64_t placement_seed = 0;
    std::uint64_t channel_seed = 0;
    double ao_secrecy = 0.0;
    double ao_certified = 0.0;  // secrecy when the design is flagged feasible, else 0
    bool ao_feasible = false;
    int ao_iters = 0;
    double ao_time = 0.0;
    int ao_flags = 0;
    bool has_dunet = false;
    double du_secrecy = 0.0;
    double du_certified = 0.0;
    bool du_feasible = false;
    double du_time = 0.0;
    int du_flags = 0;
};

struct PointSummary {
    double x = 0.0;
    double mean_secrecy = 0.0;
    double std_secrecy = 0.0;
    double mean_certified = 0.0;
    double std_certified = 0.0;
    double feasible_fraction = 0.0;
    double mean_iters = 0.0;
    double mean_ao_time = 0.0;
    bool has_dunet = false;
    double du_mean_secrecy = 0.0;
    double du_std_secrecy = 0.0;
    double du_mean_time = 0.0;
};

struct RunResult {
    Experiment experiment;
    std::vector<TrialRecord> trials;  // ordered by (grid index, trial)
    std::vector<PointSummary> points;
    std::string trend_metric;  // "secrecy" or "certified"
    int trend_direction = 1;   // +1 increasing, -1 decreasing
    double spearman_rho = 0.0;
    bool trend_pass = false;
    std::vector<std::string> notices;
};

/// Sweep over the grid; `model` is used for DUNet comparisons when its
/// dimensions match the scenario, otherwise the run is AO-only with a notice.
RunResult run_sweep(const Experiment& e, const DuNet* model = nullptr);

struct TimingRow {
    int users = 0;
    double ao_median = 0.0;
    double du_median = 0.0;
    double speedup = 0.0;
    int ao_iters_total = 0;
};

struct TimingResult {
    Experiment experiment;
    std::vector<TimingRow> rows;
    double ao_slope = 0.0;  // seconds per user, least squares over the K grid
    double du_slope = 0.0;
    double slope_ratio = 0.0;
    std::vector<std::string> notices;
};

/// Median wall times of ao_solve and forward over the K grid. The model's
/// layers are used where its binding matches; elsewhere a net with the same
/// depth and initial parameters is timed (cost does not depend on the values).
TimingResult run_timing(const Experiment& e, const DuNet* model = nullptr);

struct TrainRun {
    TrainResult result;
    double ao_mean = 0.0;
    double du_mean = 0.0;
    double ratio = 0.0;
};

TrainRun run_training(const Experiment& e);

struct ValidationResult {
    double ao_mean = 0.0;
    double du_mean = 0.0;
    double ratio = 0.0;
    double ao_median_time = 0.0;
    double du_median_time = 0.0;
    int du_feasible = 0;
    int ao_feasible = 0;
    int samples = 0;
};

ValidationResult run_validation(const Experiment& e, const DuNet& model);

/// Writes points.csv, trials.csv, summary.json and manifest.json.
void write_outputs(const RunResult& r, const std::string& dir);
void write_outputs(const TimingResult& r, const std::string& dir);
void write_outputs(const TrainRun& r, const Experiment& e, const std::string& dir);
void write_outputs(const ValidationResult& r, const Experiment& e, const std::string& dir);

nlohmann::json manifest(const Experiment& e);

inline constexpr const char* kPointsSchema = "points/v1";
inline constexpr const char* kTrialsSchema = "trials/v1";
inline constexpr const char* kTimingSchema = "timing/v1";

}  // namespace risec
