#include "risec/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "risec/parallel.hpp"

namespace risec {

namespace {

constexpr std::uint64_t kPlacementStream = 1, kChannelStream = 2, kTrainStream = 3, kValStream = 4;

const std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::PowerSweep, "power_sweep"}, {ExperimentKind::RisSweep, "ris_sweep"},
    {ExperimentKind::ThresholdSweep, "threshold_sweep"}, {ExperimentKind::TimingSweep, "timing_sweep"},
    {ExperimentKind::Train, "train"}, {ExperimentKind::Validate, "validate"}};

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean(x), my = mean(y);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return den > 0.0 ? num / den : 0.0;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    return os;
}

void write_json(const nlohmann::json& j, const std::string& dir, const std::string& name) {
    auto os = open_out(dir, name);
    os << j.dump(2) << "\n";
}

std::string csv_preamble(const Experiment& e, const char* schema) {
    return std::string("# schema=") + schema + " config_hash=" + config_hash(e) + " seed=" + std::to_string(e.seed) +
           "\n";
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
    return {{"layers", c.layers},
            {"rho_sec", c.rho_sec},
            {"rho_pow", c.rho_pow},
            {"scheme", c.scheme == TrainConfig::Scheme::Spsa ? "spsa" : "central_difference"},
            {"h", c.h},
            {"spsa_samples", c.spsa_samples},
            {"learning_rate", c.learning_rate},
            {"lr_decay", c.lr_decay},
            {"epochs_per_stage", c.epochs_per_stage},
            {"steps_per_epoch", c.steps_per_epoch},
            {"batch", c.batch},
            {"patience", c.patience},
            {"seed", c.seed},
            {"workers", c.workers}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    c.layers = j.value("layers", c.layers);
    c.rho_sec = j.value("rho_sec", c.rho_sec);
    c.rho_pow = j.value("rho_pow", c.rho_pow);
    if (j.contains("scheme")) {
        const auto s = j.at("scheme").get<std::string>();
        if (s == "spsa")
            c.scheme = TrainConfig::Scheme::Spsa;
        else if (s == "central_difference")
            c.scheme = TrainConfig::Scheme::CentralDifference;
        else
            throw Error(ErrorKind::Config, "unknown gradient scheme '" + s + "'");
    }
    c.h = j.value("h", c.h);
    c.spsa_samples = j.value("spsa_samples", c.spsa_samples);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.epochs_per_stage = j.value("epochs_per_stage", c.epochs_per_stage);
    c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
    c.batch = j.value("batch", c.batch);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    return c;
}

// Overrides may only touch keys the scene reader understands.
void check_overrides(const nlohmann::json& o, const nlohmann::json& reference) {
    if (!o.is_object()) throw Error(ErrorKind::Config, "scene_overrides must be an object");
    for (const auto& [section, body] : o.items()) {
        if (!reference.contains(section) || !body.is_object())
            throw Error(ErrorKind::Config, "scene_overrides: unknown section '" + section + "'");
        for (const auto& [key, value] : body.items())
            if (!reference.at(section).contains(key) && !(section == "geometry" && key == "placement") &&
                !(section == "system" && (key == "power_budget_dbm" || key == "noise_dbm")))
                throw Error(ErrorKind::Config, "scene_overrides: unknown key '" + section + "." + key + "'");
    }
}

Scene base_scene(const Experiment& e, int users, std::uint64_t placement_seed) {
    Placement pl;
    pl.seed = placement_seed;
    Scene s = Scene::defaults(users, e.eves, pl);
    if (!e.scene_overrides.empty()) {
        auto j = scene_to_json(s);
        check_overrides(e.scene_overrides, j);
        j.merge_patch(e.scene_overrides);
        s = scene_from_json(j);
    }
    return s;
}

// Default scene for training and validation: fixed default placement, channels vary.
Scene training_scene(const Experiment& e) { return base_scene(e, e.users, Placement{}.seed); }

std::vector<Sample> samples(const Experiment& e, const Scene& s, std::uint64_t stream, int count) {
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(make_sample(s, child_seed(e.seed, stream, static_cast<std::uint64_t>(i)), e.upsilon,
                                  e.rel_direct, e.rel_cascaded));
    return out;
}

}  // namespace

std::string to_string(ExperimentKind k) {
    for (const auto& [kind, name] : kKindNames)
        if (kind == k) return name;
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kKindNames)
        if (s == name) return kind;
    throw Error(ErrorKind::Config, "unknown experiment kind '" + s + "'");
}

Experiment Experiment::defaults(ExperimentKind kind) {
    Experiment e;
    e.kind = kind;
    switch (kind) {
        case ExperimentKind::PowerSweep:
            e.grid = {10, 15, 20, 25, 30, 35, 40};
            break;
        case ExperimentKind::RisSweep:
            // RIS-dominant links so the cascaded path is what J scales
            e.users = 12;
            e.scene_overrides = {{"system", {{"power_budget_w", dbm_to_watt(30.0)}}},
                                 {"propagation", {{"direct_blockage_db", 40.0}, {"pathloss_ris", 2.2}}}};
            e.grid = {8, 16, 32, 64};
            break;
        case ExperimentKind::ThresholdSweep:
            e.users = 2;
            e.eves = 1;
            e.scene_overrides = {{"system", {{"eps_eve", 1.0}}}};
            e.grid = {1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
            break;
        case ExperimentKind::TimingSweep:
            e.eves = 2;
            e.grid = {2, 4, 6, 8};
            e.trials = 10;
            break;
        case ExperimentKind::Train:
        case ExperimentKind::Validate:
            e.users = 4;
            e.eves = 2;
            e.grid = {0};
            e.trials = 1;
            break;
    }
    return e;
}

void Experiment::validate() const {
    if (grid.empty()) throw Error(ErrorKind::Config, "experiment grid is empty");
    if (trials < 1) throw Error(ErrorKind::Config, "trials must be >= 1");
    if (users < 1 || eves < 1) throw Error(ErrorKind::Config, "users and eves must be >= 1");
    if (workers < 1) throw Error(ErrorKind::Config, "workers must be >= 1");
    if (rel_direct < 0.0 || rel_cascaded < 0.0) throw Error(ErrorKind::Config, "uncertainty levels must be >= 0");
    if (upsilon < 0.0) throw Error(ErrorKind::Config, "upsilon must be >= 0");
    if (kind == ExperimentKind::RisSweep)
        for (double x : grid)
            if (x < 1 || x != std::floor(x)) throw Error(ErrorKind::Config, "RIS grid values must be positive integers");
    if (kind == ExperimentKind::TimingSweep)
        for (double x : grid)
            if (x < 1 || x != std::floor(x)) throw Error(ErrorKind::Config, "K grid values must be positive integers");
    if (kind == ExperimentKind::Train || kind == ExperimentKind::Validate) {
        if (train_size < 1 && kind == ExperimentKind::Train) throw Error(ErrorKind::Config, "train_size must be >= 1");
        if (val_size < 1) throw Error(ErrorKind::Config, "val_size must be >= 1");
        train.validate();
    }
    ao.validate();
    // fail on a bad override now rather than inside the first trial
    if (!scene_overrides.empty()) base_scene(*this, kind == ExperimentKind::TimingSweep ? static_cast<int>(grid.front()) : users, Placement{}.seed).validate();
}

nlohmann::json to_json(const Experiment& e) {
    return {{"kind", to_string(e.kind)},
            {"users", e.users},
            {"eves", e.eves},
            {"scene_overrides", e.scene_overrides},
            {"grid", e.grid},
            {"trials", e.trials},
            {"seed", e.seed},
            {"upsilon", e.upsilon},
            {"rel_direct", e.rel_direct},
            {"rel_cascaded", e.rel_cascaded},
            {"workers", e.workers},
            {"train_size", e.train_size},
            {"val_size", e.val_size},
            {"out_dir", e.out_dir},
            {"ao", to_json(e.ao)},
            {"train", train_config_to_json(e.train)}};
}

Experiment experiment_from_json(const nlohmann::json& j) {
    try {
        const auto kind = experiment_kind_from_string(j.value("kind", std::string("power_sweep")));
        Experiment e = Experiment::defaults(kind);
        e.users = j.value("users", e.users);
        e.eves = j.value("eves", e.eves);
        if (j.contains("scene_overrides")) e.scene_overrides = j.at("scene_overrides");
        if (j.contains("grid")) e.grid = j.at("grid").get<std::vector<double>>();
        e.trials = j.value("trials", e.trials);
        e.seed = j.value("seed", e.seed);
        e.upsilon = j.value("upsilon", e.upsilon);
        e.rel_direct = j.value("rel_direct", e.rel_direct);
        e.rel_cascaded = j.value("rel_cascaded", e.rel_cascaded);
        e.workers = j.value("workers", e.workers);
        e.train_size = j.value("train_size", e.train_size);
        e.val_size = j.value("val_size", e.val_size);
        e.out_dir = j.value("out_dir", e.out_dir);
        if (j.contains("ao")) e.ao = ao_config_from_json(j.at("ao"));
        if (j.contains("train")) e.train = train_config_from_json(j.at("train"), e.train);
        e.validate();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorKind::Config, std::string("experiment config: ") + ex.what());
    }
}

std::string config_hash(const Experiment& e) {
    auto j = to_json(e);
    j.erase("out_dir");
    j.erase("workers");  // results do not depend on either
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::pair<int, int> ris_shape(int elements) {
    if (elements < 1) throw Error(ErrorKind::Config, "RIS needs at least one element");
    int jz = static_cast<int>(std::floor(std::sqrt(static_cast<double>(elements))));
    while (elements % jz) --jz;
    return {elements / jz, jz};
}

Scene trial_scene(const Experiment& e, double x, int trial) {
    const std::uint64_t pseed = child_seed(e.seed, kPlacementStream, static_cast<std::uint64_t>(trial));
    const int users = e.kind == ExperimentKind::TimingSweep ? static_cast<int>(x) : e.users;
    Scene s = base_scene(e, users, pseed);
    switch (e.kind) {
        case ExperimentKind::PowerSweep:
            s.power_budget = dbm_to_watt(x);
            break;
        case ExperimentKind::RisSweep: {
            const auto [jx, jz] = ris_shape(static_cast<int>(x));
            s.ris_jx = jx;
            s.ris_jz = jz;
            break;
        }
        case ExperimentKind::ThresholdSweep:
            s.eps_user = x;
            break;
        default:
            break;
    }
    s.validate();
    return s;
}

std::uint64_t trial_channel_seed(const Experiment& e, int trial) {
    return child_seed(e.seed, kChannelStream, static_cast<std::uint64_t>(trial));
}

Problem trial_problem(const Experiment& e, const Scene& s, const ChannelSet& ch) {
    return make_problem(s, ch, HardwareProfile{e.upsilon}, UncertaintyModel::relative(ch, e.rel_direct, e.rel_cascaded));
}

Sample make_sample(const Scene& s, std::uint64_t channel_seed, double upsilon, double rel_direct,
                   double rel_cascaded) {
    Sample x;
    x.scene = s;
    x.channels = build_channels(s, channel_seed);
    x.hw = HardwareProfile{upsilon};
    x.uncertainty = UncertaintyModel::relative(x.channels, rel_direct, rel_cascaded);
    return x;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::Config, "spearman needs two equal series");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

RunResult run_sweep(const Experiment& e, const DuNet* model) {
    e.validate();
    if (e.kind != ExperimentKind::PowerSweep && e.kind != ExperimentKind::RisSweep &&
        e.kind != ExperimentKind::ThresholdSweep)
        throw Error(ErrorKind::Config, "run_sweep expects a power, ris or threshold sweep");
    RunResult out;
    out.experiment = e;
    const int npts = static_cast<int>(e.grid.size());
    out.trials.resize(static_cast<std::size_t>(npts * e.trials));

    // DUNet only where the model's dimensions fit the scenario
    std::vector<char> use_model(static_cast<std::size_t>(npts), 0);
    if (model) {
        for (int g = 0; g < npts; ++g) {
            const Scene s = trial_scene(e, e.grid[static_cast<std::size_t>(g)], 0);
            const auto b = DimensionBinding::of(build_channels(s, trial_channel_seed(e, 0)));
            use_model[static_cast<std::size_t>(g)] = b == model->binding;
            if (!use_model[static_cast<std::size_t>(g)])
                out.notices.push_back("model bound to " + model->binding.describe() + " does not fit grid value " +
                                      num(e.grid[static_cast<std::size_t>(g)]) + " (" + b.describe() +
                                      "); AO only there");
        }
    } else {
        out.notices.push_back("no model supplied; AO-only run");
    }

    parallel_for(npts * e.trials, e.workers, [&](int idx) {
        const int g = idx / e.trials, t = idx % e.trials;
        const double x = e.grid[static_cast<std::size_t>(g)];
        TrialRecord& rec = out.trials[static_cast<std::size_t>(idx)];
        rec.x = x;
        rec.trial = t;
        rec.placement_seed = child_seed(e.seed, kPlacementStream, static_cast<std::uint64_t>(t));
        rec.channel_seed = trial_channel_seed(e, t);
        const Scene s = trial_scene(e, x, t);
        const ChannelSet ch = build_channels(s, rec.channel_seed);
        const Problem p = trial_problem(e, s, ch);
        const AoResult ao = ao_solve(p, e.ao);
        rec.ao_secrecy = ao.report.sum_secrecy;
        rec.ao_feasible = ao.feasible;
        rec.ao_certified = ao.feasible ? ao.report.sum_secrecy : 0.0;
        rec.ao_iters = ao.iters;
        rec.ao_time = ao.wall_time;
        rec.ao_flags = ao.flags.total();
        if (use_model[static_cast<std::size_t>(g)]) {
            const ForwardResult du = forward(*model, p, e.ao);
            rec.has_dunet = true;
            rec.du_secrecy = du.report.sum_secrecy;
            rec.du_feasible = du.eval.feasible;
            rec.du_certified = du.eval.feasible ? du.report.sum_secrecy : 0.0;
            rec.du_time = du.wall_time;
            rec.du_flags = du.flags.total();
        }
    });

    std::vector<double> xs, ys;
    out.trend_metric = e.kind == ExperimentKind::ThresholdSweep ? "certified" : "secrecy";
    out.trend_direction = e.kind == ExperimentKind::ThresholdSweep ? -1 : 1;
    for (int g = 0; g < npts; ++g) {
        PointSummary ps;
        ps.x = e.grid[static_cast<std::size_t>(g)];
        std::vector<double> sec, cert, iters, times, dsec, dtime;
        int feas = 0;
        for (int t = 0; t < e.trials; ++t) {
            const auto& r = out.trials[static_cast<std::size_t>(g * e.trials + t)];
            sec.push_back(r.ao_secrecy);
            cert.push_back(r.ao_certified);
            iters.push_back(r.ao_iters);
            times.push_back(r.ao_time);
            feas += r.ao_feasible;
            if (r.has_dunet) {
                dsec.push_back(r.du_secrecy);
                dtime.push_back(r.du_time);
            }
        }
        ps.mean_secrecy = mean(sec);
        ps.std_secrecy = stddev(sec);
        ps.mean_certified = mean(cert);
        ps.std_certified = stddev(cert);
        ps.feasible_fraction = static_cast<double>(feas) / e.trials;
        ps.mean_iters = mean(iters);
        ps.mean_ao_time = mean(times);
        ps.has_dunet = !dsec.empty();
        ps.du_mean_secrecy = mean(dsec);
        ps.du_std_secrecy = stddev(dsec);
        ps.du_mean_time = mean(dtime);
        out.points.push_back(ps);
        xs.push_back(ps.x);
        ys.push_back(out.trend_metric == "certified" ? ps.mean_certified : ps.mean_secrecy);
    }
    if (npts >= 2) {
        out.spearman_rho = spearman(xs, ys);
        out.trend_pass = out.trend_direction * out.spearman_rho > 0.9;
    }
    return out;
}

TimingResult run_timing(const Experiment& e, const DuNet* model) {
    e.validate();
    TimingResult out;
    out.experiment = e;
    const int layers = model ? static_cast<int>(model->layers.size()) : e.train.layers;
    if (!model) out.notices.push_back("no model supplied; timing a net with initial parameters");
    std::vector<double> ks, ao_t, du_t;
    // serial on purpose: concurrent runs would distort the wall times
    for (double x : e.grid) {
        TimingRow row;
        row.users = static_cast<int>(x);
        std::vector<double> ta, td;
        for (int t = 0; t < e.trials; ++t) {
            const Scene s = trial_scene(e, x, t);
            const ChannelSet ch = build_channels(s, trial_channel_seed(e, t));
            const Problem p = trial_problem(e, s, ch);
            const auto b = DimensionBinding::of(ch);
            const bool fits = model && b == model->binding;
            if (model && !fits && t == 0)
                out.notices.push_back("K=" + std::to_string(row.users) + ": model dimensions differ; timing a net with initial parameters and L=" +
                                      std::to_string(layers));
            const DuNet net = fits ? *model : DuNet::initial(b, layers);
            const AoResult ao = ao_solve(p, e.ao);
            row.ao_iters_total += ao.iters;
            ta.push_back(ao.wall_time);
            td.push_back(forward(net, p, e.ao).wall_time);
        }
        row.ao_median = median(ta);
        row.du_median = median(td);
        row.speedup = row.du_median > 0.0 ? row.ao_median / row.du_median : 0.0;
        out.rows.push_back(row);
        ks.push_back(x);
        ao_t.push_back(row.ao_median);
        du_t.push_back(row.du_median);
    }
    out.ao_slope = ls_slope(ks, ao_t);
    out.du_slope = ls_slope(ks, du_t);
    out.slope_ratio = out.du_slope > 0.0 ? out.ao_slope / out.du_slope : std::numeric_limits<double>::infinity();
    return out;
}

TrainRun run_training(const Experiment& e) {
    e.validate();
    const Scene s = training_scene(e);
    const auto train = samples(e, s, kTrainStream, e.train_size);
    const auto val = samples(e, s, kValStream, e.val_size);
    TrainConfig cfg = e.train;
    cfg.workers = std::max(cfg.workers, e.workers);
    TrainRun out;
    out.result = train_incremental(train, val, cfg, e.ao);
    double ao = 0.0, du = 0.0;
    std::vector<double> ao_s(val.size()), du_s(val.size());
    parallel_for(static_cast<int>(val.size()), e.workers, [&](int i) {
        const Problem p = val[static_cast<std::size_t>(i)].problem();
        ao_s[static_cast<std::size_t>(i)] = ao_solve(p, e.ao).report.sum_secrecy;
        du_s[static_cast<std::size_t>(i)] = forward(out.result.net, p, e.ao).report.sum_secrecy;
    });
    for (std::size_t i = 0; i < val.size(); ++i) {
        ao += ao_s[i];
        du += du_s[i];
    }
    out.ao_mean = ao / static_cast<double>(val.size());
    out.du_mean = du / static_cast<double>(val.size());
    out.ratio = out.ao_mean != 0.0 ? out.du_mean / out.ao_mean : 0.0;
    return out;
}

ValidationResult run_validation(const Experiment& e, const DuNet& model) {
    e.validate();
    const Scene s = training_scene(e);
    const auto val = samples(e, s, kValStream, e.val_size);
    model.check(val.front().channels);
    ValidationResult out;
    out.samples = static_cast<int>(val.size());
    std::vector<double> ta, td;
    double ao = 0.0, du = 0.0;
    for (const auto& x : val) {
        const Problem p = x.problem();
        const AoResult a = ao_solve(p, e.ao);
        const ForwardResult d = forward(model, p, e.ao);
        ao += a.report.sum_secrecy;
        du += d.report.sum_secrecy;
        out.ao_feasible += a.feasible;
        out.du_feasible += d.eval.feasible;
        ta.push_back(a.wall_time);
        td.push_back(d.wall_time);
    }
    out.ao_mean = ao / out.samples;
    out.du_mean = du / out.samples;
    out.ratio = out.ao_mean != 0.0 ? out.du_mean / out.ao_mean : 0.0;
    out.ao_median_time = median(ta);
    out.du_median_time = median(td);
    return out;
}

nlohmann::json manifest(const Experiment& e) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::vector<std::uint64_t> placement, channel;
    for (int t = 0; t < e.trials; ++t) {
        placement.push_back(child_seed(e.seed, kPlacementStream, static_cast<std::uint64_t>(t)));
        channel.push_back(trial_channel_seed(e, t));
    }
    return {{"config_hash", config_hash(e)},
            {"seed", e.seed},
            {"placement_seeds", placement},
            {"channel_seeds", channel},
            {"experiment", to_json(e)},
            {"version", "risec 1.0.0"},
            {"schemas", {{"points", kPointsSchema}, {"trials", kTrialsSchema}, {"timing", kTimingSchema}}},
            {"created", stamp}};
}

void write_outputs(const RunResult& r, const std::string& dir) {
    const Experiment& e = r.experiment;
    {
        auto os = open_out(dir, "points.csv");
        os << csv_preamble(e, kPointsSchema);
        os << "x,mean_secrecy,std_secrecy,mean_certified,std_certified,feasible_fraction,mean_iters,mean_ao_time,"
              "du_mean_secrecy,du_std_secrecy,du_mean_time\n";
        for (const auto& p : r.points) {
            os << num(p.x) << ',' << num(p.mean_secrecy) << ',' << num(p.std_secrecy) << ',' << num(p.mean_certified)
               << ',' << num(p.std_certified) << ',' << num(p.feasible_fraction) << ',' << num(p.mean_iters) << ','
               << num(p.mean_ao_time) << ',';
            if (p.has_dunet)
                os << num(p.du_mean_secrecy) << ',' << num(p.du_std_secrecy) << ',' << num(p.du_mean_time);
            else
                os << ",,";
            os << '\n';
        }
    }
    {
        auto os = open_out(dir, "trials.csv");
        os << csv_preamble(e, kTrialsSchema);
        os << "x,trial,placement_seed,channel_seed,ao_secrecy,ao_certified,ao_feasible,ao_iters,ao_time,ao_flags,"
              "du_secrecy,du_certified,du_feasible,du_time,du_flags\n";
        for (const auto& t : r.trials) {
            os << num(t.x) << ',' << t.trial << ',' << t.placement_seed << ',' << t.channel_seed << ','
               << num(t.ao_secrecy) << ',' << num(t.ao_certified) << ',' << t.ao_feasible << ',' << t.ao_iters << ','
               << num(t.ao_time) << ',' << t.ao_flags << ',';
            if (t.has_dunet)
                os << num(t.du_secrecy) << ',' << num(t.du_certified) << ',' << t.du_feasible << ',' << num(t.du_time)
                   << ',' << t.du_flags;
            else
                os << ",,,,";
            os << '\n';
        }
    }
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points)
        pts.push_back({{"x", p.x},
                       {"mean_secrecy", p.mean_secrecy},
                       {"std_secrecy", p.std_secrecy},
                       {"mean_certified", p.mean_certified},
                       {"feasible_fraction", p.feasible_fraction},
                       {"mean_iters", p.mean_iters}});
    write_json({{"config_hash", config_hash(e)},
                {"seed", e.seed},
                {"kind", to_string(e.kind)},
                {"trend_metric", r.trend_metric},
                {"trend_direction", r.trend_direction},
                {"spearman", r.spearman_rho},
                {"trend_pass", r.trend_pass},
                {"points", pts},
                {"notices", r.notices}},
               dir, "summary.json");
    write_json(manifest(e), dir, "manifest.json");
}

void write_outputs(const TimingResult& r, const std::string& dir) {
    const Experiment& e = r.experiment;
    {
        auto os = open_out(dir, "timing.csv");
        os << csv_preamble(e, kTimingSchema);
        os << "users,ao_median_time,du_median_time,speedup,ao_iters_total\n";
        for (const auto& row : r.rows)
            os << row.users << ',' << num(row.ao_median) << ',' << num(row.du_median) << ',' << num(row.speedup)
               << ',' << row.ao_iters_total << '\n';
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"users", row.users},
                        {"ao_median_time", row.ao_median},
                        {"du_median_time", row.du_median},
                        {"speedup", row.speedup},
                        {"ao_iters_total", row.ao_iters_total}});
    write_json({{"config_hash", config_hash(e)},
                {"seed", e.seed},
                {"kind", to_string(e.kind)},
                {"rows", rows},
                {"ao_slope", r.ao_slope},
                {"du_slope", r.du_slope},
                {"slope_ratio", r.slope_ratio},
                {"notices", r.notices}},
               dir, "summary.json");
    write_json(manifest(e), dir, "manifest.json");
}

void write_outputs(const TrainRun& r, const Experiment& e, const std::string& dir) {
    {
        auto os = open_out(dir, "train_trace.csv");
        os << csv_preamble(e, "train_trace/v1");
        os << "stage,epoch,train_loss,val_loss\n";
        for (const auto& t : r.result.trace)
            os << t.stage << ',' << t.epoch << ',' << num(t.train_loss) << ',' << num(t.val_loss) << '\n';
    }
    write_json({{"config_hash", config_hash(e)},
                {"seed", e.seed},
                {"kind", to_string(e.kind)},
                {"train_time", r.result.wall_time},
                {"skipped_params", r.result.skipped_params},
                {"stage_val", r.result.stage_val},
                {"ao_mean_secrecy", r.ao_mean},
                {"du_mean_secrecy", r.du_mean},
                {"ratio", r.ratio}},
               dir, "summary.json");
    write_json(manifest(e), dir, "manifest.json");
}

void write_outputs(const ValidationResult& r, const Experiment& e, const std::string& dir) {
    write_json({{"config_hash", config_hash(e)},
                {"seed", e.seed},
                {"kind", to_string(e.kind)},
                {"samples", r.samples},
                {"ao_mean_secrecy", r.ao_mean},
                {"du_mean_secrecy", r.du_mean},
                {"ratio", r.ratio},
                {"ao_median_time", r.ao_median_time},
                {"du_median_time", r.du_median_time},
                {"ao_feasible", r.ao_feasible},
                {"du_feasible", r.du_feasible}},
               dir, "summary.json");
    write_json(manifest(e), dir, "manifest.json");
}

}  // namespace risec
