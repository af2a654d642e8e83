#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "risec/ao.hpp"

namespace risec {

double softplus(double x);
/// Inverse of softplus on (0, inf).
double softplus_inv(double y);

/// Trainable scalars of one layer, stored unconstrained.
struct LayerParams {
    double mu = 0.0;
    std::vector<double> xi;  // one per user
    double upsilon = 0.0;
    std::array<double, 4> d{};
    double beta = 0.0;

    /// Raw values whose mapped duals equal the AO initial duals and beta = 1.
    static LayerParams initial(int users);

    int size() const { return 7 + static_cast<int>(xi.size()); }
    std::vector<double> flat() const;
    void assign(const double* values);

    /// beta = min(softplus(raw), 1).
    double damping() const;
    /// mu, d via softplus; Xi_k = softplus(xi_k) I, Upsilon = softplus(upsilon) I;
    /// psi taken from `base`.
    DualState to_duals(const Problem& p, const DualState& base) const;
};

struct DimensionBinding {
    int bs = 0, user_ant = 0, eve_ant = 0, users = 0, eves = 0, ris = 0;

    static DimensionBinding of(const ChannelSet& ch);
    bool operator==(const DimensionBinding& o) const = default;
    std::string describe() const;
};

struct DuNet {
    std::vector<LayerParams> layers;
    DimensionBinding binding;
    // training metadata
    int epochs = 0;
    std::uint64_t seed = 0;
    std::vector<double> loss_trace;

    static DuNet initial(const DimensionBinding& b, int layers);
    int num_params() const;
    std::vector<double> flat() const;
    void assign(const std::vector<double>& values);
    void check(const ChannelSet& ch) const;  // throws Dimension
};

/// One layer: duals from the params, the shared AO primal step, then damping
/// (skipped when beta == 1 so the output equals the AO step exactly).
AoState layer_forward(const Problem& p, const AoState& s, const LayerParams& params, const AoConfig& cfg,
                      NumericFlags& flags);

struct ForwardResult {
    Design design;
    RateReport report;
    Evaluation eval;
    NumericFlags flags;
    double wall_time = 0.0;
};

ForwardResult forward(const DuNet& net, const Problem& p, const AoConfig& cfg = {});

struct TrainConfig {
    int layers = 6;
    double rho_sec = 1.0;
    double rho_pow = 10.0;
    enum class Scheme { CentralDifference, Spsa } scheme = Scheme::CentralDifference;
    double h = 1e-3;
    int spsa_samples = 4;
    double learning_rate = 0.05;
    double lr_decay = 0.9;  // per epoch within a stage
    int epochs_per_stage = 3;
    int steps_per_epoch = 3;  // minibatch updates per epoch; <= 0 means one pass over the train split
    int batch = 16;           // minibatch for gradient estimates; <= 0 means the full train split
    int patience = 2;
    std::uint64_t seed = 1;
    int workers = 1;
    /// Test hook: when set, replaces the batch loss with a function of the flat
    /// parameter vector.
    std::function<double(const std::vector<double>&)> loss_override;

    void validate() const;
};

/// One training sample: channels plus the problem data bound to them.
struct Sample {
    ChannelSet channels;
    Scene scene;
    HardwareProfile hw;
    UncertaintyModel uncertainty;

    Problem problem() const;
};

double sample_loss(const ForwardResult& r, const Problem& p, const TrainConfig& cfg);
double loss(const DuNet& net, const std::vector<Sample>& batch, const TrainConfig& cfg, const AoConfig& ao = {});

struct GradientResult {
    std::vector<double> grad;
    std::vector<int> skipped;  // parameters whose probes gave a non-finite loss
};

/// Gradient of the loss over the parameters of layers [0, active) (all layers
/// when active <= 0).
GradientResult estimate_gradient(const DuNet& net, const std::vector<Sample>& batch, const TrainConfig& cfg,
                                 int active = 0, const AoConfig& ao = {}, std::uint64_t stream = 0);

struct StageRecord {
    int stage = 0;
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    DuNet net;
    std::vector<StageRecord> trace;
    std::vector<double> stage_val;  // best validation loss per stage
    double wall_time = 0.0;
    int skipped_params = 0;
};

/// Layer-wise training: stage s trains layers 1..s with layer s warm-started
/// from layer s-1; the best validation checkpoint of the last stage is returned.
TrainResult train_incremental(const std::vector<Sample>& train, const std::vector<Sample>& val,
                              const TrainConfig& cfg, const AoConfig& ao = {});

void save_dunet(const DuNet& net, const std::string& path);
DuNet load_dunet(const std::string& path);

}  // namespace risec
