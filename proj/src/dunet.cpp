#include "risec/dunet.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <type_traits>

#include "risec/linalg.hpp"
#include "risec/parallel.hpp"

namespace risec {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double softplus_inv(double y) {
    if (!(y > 0.0)) throw Error(ErrorKind::Config, "softplus_inv needs a positive value");
    return y > 30.0 ? y : std::log(std::expm1(y));
}

LayerParams LayerParams::initial(int users) {
    LayerParams l;
    const double one = softplus_inv(1.0);
    l.mu = one;
    l.xi.assign(static_cast<std::size_t>(users), one);
    l.upsilon = one;
    l.d = {one, one, one, one};
    l.beta = 10.0;  // softplus(10) > 1, so beta = 1
    return l;
}

std::vector<double> LayerParams::flat() const {
    std::vector<double> v{mu};
    v.insert(v.end(), xi.begin(), xi.end());
    v.push_back(upsilon);
    v.insert(v.end(), d.begin(), d.end());
    v.push_back(beta);
    return v;
}

void LayerParams::assign(const double* x) {
    mu = *x++;
    for (auto& v : xi) v = *x++;
    upsilon = *x++;
    for (auto& v : d) v = *x++;
    beta = *x;
}

double LayerParams::damping() const { return std::min(softplus(beta), 1.0); }

DualState LayerParams::to_duals(const Problem& p, const DualState& base) const {
    if (static_cast<int>(xi.size()) != p.users()) throw Error(ErrorKind::Dimension, "layer has the wrong user count");
    DualState s;
    s.mu = softplus(mu);
    const int n = p.lifted_dim();
    for (double x : xi) s.xi.push_back(softplus(x) * CMat::Identity(n, n));
    s.upsilon = softplus(upsilon) * CMat::Identity(p.ris() + 1, p.ris() + 1);
    for (std::size_t i = 0; i < 4; ++i) s.d[i] = softplus(d[i]);
    s.psi = base.psi.size() == p.users() ? base.psi : RVec::Zero(p.users());
    return s;
}

DimensionBinding DimensionBinding::of(const ChannelSet& ch) {
    DimensionBinding b;
    b.bs = ch.bs_antennas();
    b.user_ant = ch.h_bk.empty() ? 0 : static_cast<int>(ch.h_bk.front().cols());
    b.eve_ant = ch.h_be.empty() ? 0 : static_cast<int>(ch.h_be.front().cols());
    b.users = ch.num_users();
    b.eves = ch.num_eves();
    b.ris = ch.ris_elements();
    return b;
}

std::string DimensionBinding::describe() const {
    std::ostringstream os;
    os << "N_B=" << bs << " N_K=" << user_ant << " N_E=" << eve_ant << " K=" << users << " E=" << eves << " J=" << ris;
    return os.str();
}

DuNet DuNet::initial(const DimensionBinding& b, int layers) {
    if (layers < 1) throw Error(ErrorKind::Config, "DUNet needs at least one layer");
    DuNet net;
    net.binding = b;
    net.layers.assign(static_cast<std::size_t>(layers), LayerParams::initial(b.users));
    return net;
}

int DuNet::num_params() const {
    int n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
}

std::vector<double> DuNet::flat() const {
    std::vector<double> v;
    for (const auto& l : layers) {
        const auto f = l.flat();
        v.insert(v.end(), f.begin(), f.end());
    }
    return v;
}

void DuNet::assign(const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != num_params()) throw Error(ErrorKind::Dimension, "parameter vector length");
    const double* x = v.data();
    for (auto& l : layers) {
        l.assign(x);
        x += l.size();
    }
}

void DuNet::check(const ChannelSet& ch) const {
    const auto b = DimensionBinding::of(ch);
    if (!(b == binding))
        throw Error(ErrorKind::Dimension, "DUNet bound to " + binding.describe() + ", channels are " + b.describe());
}

AoState layer_forward(const Problem& p, const AoState& s, const LayerParams& params, const AoConfig& cfg,
                      NumericFlags& flags) {
    const DualState duals = params.to_duals(p, DualState::initial(p));
    AoState next = primal_step(p, s, duals, cfg, flags);
    const double beta = params.damping();
    if (beta == 1.0) return next;
    for (std::size_t k = 0; k < next.q.size(); ++k) next.q[k] = (1.0 - beta) * s.q[k] + beta * next.q[k];
    // phases: blend on the unit circle, keep the old phase where the blend vanishes
    for (Eigen::Index m = 0; m < next.phases.size(); ++m) {
        const cd z = (1.0 - beta) * std::polar(1.0, s.phases(m)) + beta * std::polar(1.0, next.phases(m));
        next.phases(m) = std::abs(z) > 0.0 ? std::arg(z) : s.phases(m);
    }
    return next;
}

ForwardResult forward(const DuNet& net, const Problem& p, const AoConfig& cfg) {
    net.check(p.ch());
    const auto t0 = std::chrono::steady_clock::now();
    ForwardResult r;
    AoState s = AoState::initial(p);
    for (const auto& layer : net.layers) s = layer_forward(p, s, layer, cfg, r.flags);
    r.design = extract_design(p, s);
    AoState out;
    for (const auto& w : r.design.w) {
        const CVec v = Eigen::Map<const CVec>(w.data(), w.size());
        out.q.push_back(v * v.adjoint());
    }
    out.phases = r.design.phases;
    r.eval = evaluate(p, out);
    if (!r.eval.feasible) {
        const AoState low = power_backoff(p, out, r.eval);
        Evaluation lev = evaluate(p, low);
        if (lev.feasible) {
            r.eval = std::move(lev);
            const double f = std::sqrt(r.eval.power / std::max(evaluate(p, out).power, 1e-300));
            for (auto& w : r.design.w) w *= f;
        }
    }
    r.report = r.eval.report;
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

void TrainConfig::validate() const {
    if (layers < 1) throw Error(ErrorKind::Config, "layers must be >= 1");
    if (!(h > 0.0)) throw Error(ErrorKind::Config, "finite-difference step must be positive");
    if (!(rho_sec >= 0.0) || !(rho_pow >= 0.0)) throw Error(ErrorKind::Config, "penalty weights must be >= 0");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "learning rate must be positive");
    if (epochs_per_stage < 1) throw Error(ErrorKind::Config, "epochs_per_stage must be >= 1");
    if (spsa_samples < 1) throw Error(ErrorKind::Config, "spsa_samples must be >= 1");
    if (workers < 1) throw Error(ErrorKind::Config, "workers must be >= 1");
}

Problem Sample::problem() const { return make_problem(scene, channels, hw, uncertainty); }

double sample_loss(const ForwardResult& r, const Problem& p, const TrainConfig& cfg) {
    double hinge = 0.0;
    for (int k = 0; k < p.users(); ++k) {
        hinge += std::max(0.0, p.eps_user - r.report.rate_user(k));
        hinge += std::max(0.0, r.report.rate_eve(k) - p.eps_eve);
    }
    const double over = std::max(0.0, r.eval.power / p.power_budget - 1.0);
    return -r.report.sum_secrecy + cfg.rho_sec * hinge + cfg.rho_pow * over;
}

double loss(const DuNet& net, const std::vector<Sample>& batch, const TrainConfig& cfg, const AoConfig& ao) {
    if (batch.empty()) throw Error(ErrorKind::Config, "loss needs a nonempty batch");
    if (cfg.loss_override) return cfg.loss_override(net.flat());
    std::vector<double> per(batch.size());
    parallel_for(static_cast<int>(batch.size()), cfg.workers, [&](int i) {
        const auto& s = batch[static_cast<std::size_t>(i)];
        const Problem p = s.problem();
        per[static_cast<std::size_t>(i)] = sample_loss(forward(net, p, ao), p, cfg);
    });
    // ordered reduction keeps the sum independent of the worker count
    return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
}

namespace {

DuNet truncated(const DuNet& net, int active) {
    DuNet t = net;
    if (active > 0 && active < static_cast<int>(t.layers.size())) t.layers.resize(static_cast<std::size_t>(active));
    return t;
}

}  // namespace

GradientResult estimate_gradient(const DuNet& net, const std::vector<Sample>& batch, const TrainConfig& cfg,
                                 int active, const AoConfig& ao, std::uint64_t stream) {
    cfg.validate();
    const DuNet base = truncated(net, active);
    const std::vector<double> x0 = base.flat();
    const std::size_t n = x0.size();
    GradientResult g;
    g.grad.assign(n, 0.0);
    auto eval = [&](const std::vector<double>& x) {
        DuNet probe = base;
        probe.assign(x);
        return loss(probe, batch, cfg, ao);
    };
    if (cfg.scheme == TrainConfig::Scheme::CentralDifference) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> xp = x0, xm = x0;
            xp[i] += cfg.h;
            xm[i] -= cfg.h;
            const double fp = eval(xp), fm = eval(xm);
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                g.skipped.push_back(static_cast<int>(i));
                continue;
            }
            g.grad[i] = (fp - fm) / (2.0 * cfg.h);
        }
        return g;
    }
    Rng rng(child_seed(cfg.seed, 0x5A5A, stream));
    std::bernoulli_distribution coin(0.5);
    int used = 0;
    for (int s = 0; s < cfg.spsa_samples; ++s) {
        std::vector<double> delta(n), xp = x0, xm = x0;
        for (std::size_t i = 0; i < n; ++i) {
            delta[i] = coin(rng) ? 1.0 : -1.0;
            xp[i] += cfg.h * delta[i];
            xm[i] -= cfg.h * delta[i];
        }
        const double fp = eval(xp), fm = eval(xm);
        if (!std::isfinite(fp) || !std::isfinite(fm)) continue;
        ++used;
        for (std::size_t i = 0; i < n; ++i) g.grad[i] += (fp - fm) / (2.0 * cfg.h * delta[i]);
    }
    if (used == 0) {
        for (std::size_t i = 0; i < n; ++i) g.skipped.push_back(static_cast<int>(i));
        return g;
    }
    for (auto& v : g.grad) v /= used;
    return g;
}

TrainResult train_incremental(const std::vector<Sample>& train, const std::vector<Sample>& val, const TrainConfig& cfg,
                              const AoConfig& ao) {
    cfg.validate();
    if (train.empty() || val.empty()) throw Error(ErrorKind::Config, "training needs nonempty train and validation splits");
    const auto t0 = std::chrono::steady_clock::now();
    TrainResult res;
    DuNet net = DuNet::initial(DimensionBinding::of(train.front().channels), cfg.layers);
    net.seed = cfg.seed;
    for (const auto& s : train) net.check(s.channels);
    for (const auto& s : val) net.check(s.channels);

    Rng rng(child_seed(cfg.seed, 0xB47C));
    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;
    const std::size_t bsz = cfg.batch > 0 ? std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), train.size())
                                          : train.size();
    std::uint64_t probe_stream = 0;

    for (int stage = 1; stage <= cfg.layers; ++stage) {
        if (stage > 1) net.layers[static_cast<std::size_t>(stage - 1)] = net.layers[static_cast<std::size_t>(stage - 2)];
        DuNet best = truncated(net, stage);
        double best_val = loss(best, val, cfg, ao);
        if (stage > 1) {
            // a nearly closed damping gate makes the new layer close to the
            // identity, so a stage never starts far above the previous one
            DuNet gated = best;
            gated.layers.back().beta = -30.0;
            const double gv = loss(gated, val, cfg, ao);
            if (gv < best_val) {
                best = gated;
                best_val = gv;
            }
        }
        const int n = best.num_params();
        std::vector<double> m(static_cast<std::size_t>(n), 0.0), v(static_cast<std::size_t>(n), 0.0);
        int adam_t = 0, worse = 0;
        double prev_val = best_val;
        double lr = cfg.learning_rate;
        DuNet cur = best;
        for (int epoch = 1; epoch <= cfg.epochs_per_stage; ++epoch) {
            double train_sum = 0.0;
            int batches = 0;
            const int steps = cfg.steps_per_epoch > 0 ? cfg.steps_per_epoch
                                                      : static_cast<int>((train.size() + bsz - 1) / bsz);
            for (int step = 0; step < steps; ++step) {
                std::vector<Sample> mb;
                while (mb.size() < bsz) {
                    if (cursor == order.size()) {
                        std::shuffle(order.begin(), order.end(), rng);
                        cursor = 0;
                    }
                    mb.push_back(train[static_cast<std::size_t>(order[cursor++])]);
                }
                const auto g = estimate_gradient(cur, mb, cfg, stage, ao, probe_stream++);
                res.skipped_params += static_cast<int>(g.skipped.size());
                std::vector<double> x = cur.flat();
                ++adam_t;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    m[i] = 0.9 * m[i] + 0.1 * g.grad[i];
                    v[i] = 0.999 * v[i] + 0.001 * g.grad[i] * g.grad[i];
                    const double mh = m[i] / (1.0 - std::pow(0.9, adam_t));
                    const double vh = v[i] / (1.0 - std::pow(0.999, adam_t));
                    x[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
                }
                cur.assign(x);
                train_sum += loss(cur, mb, cfg, ao);
                ++batches;
            }
            lr *= cfg.lr_decay;
            const double vl = loss(cur, val, cfg, ao);
            res.trace.push_back({stage, epoch, train_sum / std::max(batches, 1), vl});
            net.loss_trace.push_back(vl);
            ++net.epochs;
            if (vl < best_val) {
                best_val = vl;
                best = cur;
            }
            worse = vl > prev_val ? worse + 1 : 0;
            prev_val = vl;
            if (worse >= cfg.patience) break;
        }
        for (int i = 0; i < stage; ++i)
            net.layers[static_cast<std::size_t>(i)] = best.layers[static_cast<std::size_t>(i)];
        res.stage_val.push_back(best_val);
    }
    res.net = net;
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

namespace {

constexpr char kMagic[8] = {'R', 'I', 'S', 'E', 'C', 'D', 'U', 'N'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
    static_assert(std::is_arithmetic_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error(ErrorKind::Io, "truncated model file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void save_dunet(const DuNet& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kVersion);
    const auto& b = net.binding;
    for (int v : {b.bs, b.user_ant, b.eve_ant, b.users, b.eves, b.ris}) put<std::int32_t>(os, v);
    put<std::int32_t>(os, static_cast<std::int32_t>(net.layers.size()));
    for (double x : net.flat()) put<double>(os, x);
    put<std::int32_t>(os, net.epochs);
    put<std::uint64_t>(os, net.seed);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.loss_trace.size()));
    for (double x : net.loss_trace) put<double>(os, x);
    if (!os) throw Error(ErrorKind::Io, "write failed for " + path);
}

DuNet load_dunet(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::Io, "cannot open model " + path);
    char magic[sizeof(kMagic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(ErrorKind::Version, "not a DUNet model file: " + path);
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion) throw Error(ErrorKind::Version, "unsupported model version " + std::to_string(version));
    DimensionBinding b;
    for (int* f : {&b.bs, &b.user_ant, &b.eve_ant, &b.users, &b.eves, &b.ris}) *f = get<std::int32_t>(is);
    const int layers = get<std::int32_t>(is);
    if (layers < 1 || layers > 10000 || b.users < 1 || b.users > 100000)
        throw Error(ErrorKind::Version, "corrupt model header");
    DuNet net = DuNet::initial(b, layers);
    std::vector<double> x(static_cast<std::size_t>(net.num_params()));
    for (auto& v : x) v = get<double>(is);
    net.assign(x);
    net.epochs = get<std::int32_t>(is);
    net.seed = get<std::uint64_t>(is);
    const auto n = get<std::uint32_t>(is);
    if (n > 100000000u) throw Error(ErrorKind::Version, "corrupt loss trace length");
    for (std::uint32_t i = 0; i < n; ++i) net.loss_trace.push_back(get<double>(is));
    return net;
}

}  // namespace risec
