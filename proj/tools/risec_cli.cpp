#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "risec/experiment.hpp"
#include "risec/oracle.hpp"

using namespace risec;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfigError = 2, kInfeasible = 3, kNumeric = 4 };

json read_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, path + ": " + e.what());
    }
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    std::ofstream os(std::filesystem::path(dir) / name);
    if (!os) throw Error(ErrorKind::Io, "cannot write into " + dir);
    os << text;
}

// Single-scene configuration shared by the per-scenario subcommands.
struct Scenario {
    Scene scene;
    std::uint64_t channel_seed = 1;
    double upsilon = 0.0;
    double rel_direct = 0.05;
    double rel_cascaded = 0.05;
    AoConfig ao;
    OracleConfig oracle;

    static Scenario from(const json& j) {
        static const char* known[] = {"scene", "channel_seed", "upsilon", "rel_direct", "rel_cascaded", "ao", "oracle"};
        for (const auto& [key, _] : j.items())
            if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
                std::end(known))
                throw Error(ErrorKind::Config, "unknown scenario key '" + key + "'");
        Scenario s;
        try {
            s.scene = scene_from_json(j.value("scene", json::object()));
            s.channel_seed = j.value("channel_seed", s.channel_seed);
            s.upsilon = j.value("upsilon", s.upsilon);
            s.rel_direct = j.value("rel_direct", s.rel_direct);
            s.rel_cascaded = j.value("rel_cascaded", s.rel_cascaded);
            if (j.contains("ao")) s.ao = ao_config_from_json(j.at("ao"));
            if (j.contains("oracle")) {
                const auto& o = j.at("oracle");
                s.oracle.phase_levels = o.value("phase_levels", s.oracle.phase_levels);
                s.oracle.power_steps = o.value("power_steps", s.oracle.power_steps);
                s.oracle.max_points = o.value("max_points", s.oracle.max_points);
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Config, std::string("scenario: ") + e.what());
        }
        s.scene.validate();
        s.ao.validate();
        s.oracle.validate();
        return s;
    }

    json to_json() const {
        return {{"scene", scene_to_json(scene)},
                {"channel_seed", channel_seed},
                {"upsilon", upsilon},
                {"rel_direct", rel_direct},
                {"rel_cascaded", rel_cascaded},
                {"ao", risec::to_json(ao)},
                {"oracle",
                 {{"phase_levels", oracle.phase_levels},
                  {"power_steps", oracle.power_steps},
                  {"max_points", oracle.max_points}}}};
    }
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string model;
    std::optional<int> trials;
    std::optional<int> workers;
    std::string trace;
    int max_flags = 50;
};

Scenario load_scenario(const Common& c) {
    Scenario s = c.config.empty() ? Scenario::from(json::object()) : Scenario::from(read_json(c.config));
    if (c.seed) s.channel_seed = *c.seed;
    return s;
}

Experiment load_experiment(const Common& c, std::optional<ExperimentKind> force) {
    json j = c.config.empty() ? json::object() : read_json(c.config);
    if (force) j["kind"] = to_string(*force);
    Experiment e = experiment_from_json(j);
    if (c.seed) e.seed = *c.seed;
    if (c.trials) e.trials = *c.trials;
    if (c.workers) e.workers = *c.workers;
    e.out_dir = c.out;
    e.validate();
    return e;
}

std::optional<DuNet> load_model(const std::string& path) {
    if (path.empty()) return std::nullopt;
    if (!std::filesystem::exists(path)) {
        std::cerr << "notice: model file " << path << " not found; running AO only\n";
        return std::nullopt;
    }
    return load_dunet(path);
}

int design_status(bool feasible, int flags, int max_flags) {
    if (flags > max_flags) {
        std::cerr << "numeric flags " << flags << " exceed threshold " << max_flags << "\n";
        return kNumeric;
    }
    return feasible ? kOk : kInfeasible;
}

int cmd_gen_scene(const Common& c) {
    const Scenario s = load_scenario(c);
    const ChannelSet ch = build_channels(s.scene, s.channel_seed);
    json j = s.to_json();
    j["binding"] = DimensionBinding::of(ch).describe();
    write_file(c.out, "scenario.json", j.dump(2) + "\n");
    std::cout << "wrote " << (std::filesystem::path(c.out) / "scenario.json").string() << "\n";
    return kOk;
}

int cmd_solve(const Common& c) {
    Scenario s = load_scenario(c);
    if (!c.trace.empty()) s.ao.keep_trace_rows = true;
    const ChannelSet ch = build_channels(s.scene, s.channel_seed);
    const Problem p = make_problem(s.scene, ch, HardwareProfile{s.upsilon},
                                   UncertaintyModel::relative(ch, s.rel_direct, s.rel_cascaded));
    const AoResult r = ao_solve(p, s.ao);
    write_file(c.out, "ao_result.json", to_json(r).dump(2) + "\n");
    if (!c.trace.empty()) {
        std::ofstream os(c.trace);
        if (!os) throw Error(ErrorKind::Io, "cannot write " + c.trace);
        os << IterationRecord::csv_header() << "\n";
        for (const auto& row : r.rows) os << row.csv_row() << "\n";
    }
    std::cout << "ao: sum secrecy " << r.report.sum_secrecy << ", iterations " << r.iters << ", feasible "
              << (r.feasible ? "yes" : "no") << ", " << r.wall_time << " s\n";
    return design_status(r.feasible, r.flags.total(), c.max_flags);
}

int cmd_infer(const Common& c) {
    const auto model = load_model(c.model);
    if (!model) {
        if (c.model.empty()) std::cerr << "notice: no model given; running AO only\n";
        return cmd_solve(c);
    }
    const Scenario s = load_scenario(c);
    const ChannelSet ch = build_channels(s.scene, s.channel_seed);
    model->check(ch);
    const Problem p = make_problem(s.scene, ch, HardwareProfile{s.upsilon},
                                   UncertaintyModel::relative(ch, s.rel_direct, s.rel_cascaded));
    const ForwardResult r = forward(*model, p, s.ao);
    json j = {{"design", design_to_json(r.design)},
              {"sum_secrecy", r.report.sum_secrecy},
              {"sum_secrecy_clipped", r.report.sum_secrecy_clipped},
              {"feasible", r.eval.feasible},
              {"power", r.eval.power},
              {"wall_time", r.wall_time},
              {"flags", r.flags.total()}};
    write_file(c.out, "dunet_result.json", j.dump(2) + "\n");
    std::cout << "dunet: sum secrecy " << r.report.sum_secrecy << ", feasible " << (r.eval.feasible ? "yes" : "no")
              << ", " << r.wall_time << " s\n";
    return design_status(r.eval.feasible, r.flags.total(), c.max_flags);
}

int cmd_oracle(const Common& c) {
    const Scenario s = load_scenario(c);
    const ChannelSet ch = build_channels(s.scene, s.channel_seed);
    const Problem p = make_problem(s.scene, ch, HardwareProfile{s.upsilon},
                                   UncertaintyModel::relative(ch, s.rel_direct, s.rel_cascaded));
    const OracleResult o = grid_search(p, s.oracle);
    const AoResult a = ao_solve(p, s.ao);
    const GapReport g = compare(a.report.sum_secrecy, a.feasible, o.objective, o.found);
    const json j = {{"oracle", to_json(o, s.oracle)}, {"ao", to_json(a)}, {"gap", to_json(g)}};
    write_file(c.out, "oracle.json", j.dump(2) + "\n");
    std::cout << "oracle: " << o.objective << " (" << o.visited << " points, " << o.wall_time
              << " s), ao: " << a.report.sum_secrecy << ", relative gap " << g.relative_gap << "\n";
    return o.found ? kOk : kInfeasible;
}

int cmd_run(const Common& c, std::optional<ExperimentKind> force) {
    const Experiment e = load_experiment(c, force);
    const auto model = load_model(c.model);
    const DuNet* m = model ? &*model : nullptr;
    switch (e.kind) {
        case ExperimentKind::TimingSweep: {
            const auto r = run_timing(e, m);
            write_outputs(r, c.out);
            for (const auto& n : r.notices) std::cerr << "notice: " << n << "\n";
            std::cout << "K     ao[s]       dunet[s]    speedup\n";
            for (const auto& row : r.rows)
                std::cout << row.users << "  " << row.ao_median << "  " << row.du_median << "  " << row.speedup
                          << "\n";
            std::cout << "slope ratio (ao/dunet): " << r.slope_ratio << "\n";
            return kOk;
        }
        case ExperimentKind::Train: {
            const auto r = run_training(e);
            write_outputs(r, e, c.out);
            const std::string path = c.model.empty() ? (std::filesystem::path(c.out) / "model.bin").string() : c.model;
            save_dunet(r.result.net, path);
            std::cout << "trained " << r.result.net.layers.size() << " layers in " << r.result.wall_time
                      << " s; held-out secrecy dunet/ao = " << r.ratio << "; model " << path << "\n";
            return kOk;
        }
        case ExperimentKind::Validate: {
            if (!m) throw Error(ErrorKind::Config, "validate needs --model");
            const auto r = run_validation(e, *m);
            write_outputs(r, e, c.out);
            std::cout << "dunet/ao secrecy " << r.ratio << " over " << r.samples << " channels; median times "
                      << r.du_median_time << " s vs " << r.ao_median_time << " s\n";
            return kOk;
        }
        default: {
            const auto r = run_sweep(e, m);
            write_outputs(r, c.out);
            for (const auto& n : r.notices) std::cerr << "notice: " << n << "\n";
            std::cout << to_string(e.kind) << " (" << r.trend_metric << ")\n";
            for (const auto& p : r.points)
                std::cout << "  x=" << p.x << "  secrecy " << p.mean_secrecy << " +- " << p.std_secrecy
                          << "  certified " << p.mean_certified << "  feasible " << p.feasible_fraction << "\n";
            std::cout << "spearman " << r.spearman_rho << " -> " << (r.trend_pass ? "trend holds" : "trend broken")
                      << "\n";
            return kOk;
        }
    }
}

json defaults_document() {
    json kinds = json::object();
    for (auto k : {ExperimentKind::PowerSweep, ExperimentKind::RisSweep, ExperimentKind::ThresholdSweep,
                   ExperimentKind::TimingSweep, ExperimentKind::Train, ExperimentKind::Validate})
        kinds[to_string(k)] = to_json(Experiment::defaults(k));
    return {{"scenario", Scenario::from(json::object()).to_json()}, {"experiments", kinds}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS secure beamforming: AO baseline, deep-unfolded net, oracle and sweeps"};
    app.require_subcommand(0, 1);
    bool dump_defaults = false;
    app.add_flag("--dump-defaults", dump_defaults, "Print the fully resolved default configuration");

    Common c;
    auto add_common = [&](CLI::App* sub, bool with_model) {
        sub->add_option("--config", c.config, "JSON configuration file");
        sub->add_option("--seed", c.seed, "Seed override");
        sub->add_option("--out", c.out, "Output directory");
        sub->add_option("--max-flags", c.max_flags, "Numeric-flag count above which exit code 4 is returned");
        if (with_model) sub->add_option("--model", c.model, "DUNet model file");
    };
    auto* gen = app.add_subcommand("gen-scene", "Resolve a scenario and write it out");
    add_common(gen, false);
    gen->add_flag("--dump-defaults", dump_defaults, "Print the resolved scenario instead");
    auto* solve = app.add_subcommand("solve", "Run the AO solver on one scenario");
    add_common(solve, false);
    solve->add_option("--trace", c.trace, "Per-iteration CSV output");
    auto* infer = app.add_subcommand("infer", "Run a trained DUNet on one scenario (AO if no model)");
    add_common(infer, true);
    infer->add_option("--trace", c.trace, "Per-iteration CSV output for the AO fallback");
    auto* run = app.add_subcommand("run", "Run an experiment config (sweeps, timing, train, validate)");
    add_common(run, true);
    run->add_option("--trials", c.trials, "Trials per grid point");
    run->add_option("--workers", c.workers, "Concurrent trials");
    auto* bench = app.add_subcommand("bench", "Timing sweep of AO against DUNet");
    add_common(bench, true);
    bench->add_option("--trials", c.trials, "Trials per K");
    auto* train = app.add_subcommand("train", "Incremental DUNet training");
    add_common(train, true);
    train->add_option("--workers", c.workers, "Threads for loss evaluation");
    auto* eval = app.add_subcommand("eval", "Compare a trained DUNet with AO on held-out channels");
    add_common(eval, true);
    auto* oracle = app.add_subcommand("oracle", "Exhaustive grid search on a small scenario");
    add_common(oracle, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (dump_defaults) {
            if (gen->parsed())
                std::cout << load_scenario(c).to_json().dump(2) << "\n";
            else
                std::cout << defaults_document().dump(2) << "\n";
            return kOk;
        }
        if (gen->parsed()) return cmd_gen_scene(c);
        if (solve->parsed()) return cmd_solve(c);
        if (infer->parsed()) return cmd_infer(c);
        if (run->parsed()) return cmd_run(c, std::nullopt);
        if (bench->parsed()) return cmd_run(c, ExperimentKind::TimingSweep);
        if (train->parsed()) return cmd_run(c, ExperimentKind::Train);
        if (eval->parsed()) {
            if (c.model.empty()) throw Error(ErrorKind::Config, "eval needs --model");
            if (!std::filesystem::exists(c.model)) throw Error(ErrorKind::Io, "model file " + c.model + " not found");
            return cmd_run(c, ExperimentKind::Validate);
        }
        if (oracle->parsed()) return cmd_oracle(c);
        std::cout << app.help();
        return kOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Infeasible:
                return kInfeasible;
            default:
                return kConfigError;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
