#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "risec/experiment.hpp"

using namespace risec;

namespace {

Experiment tiny(ExperimentKind kind) {
    Experiment e = Experiment::defaults(kind);
    e.trials = 2;
    e.ao.max_iters = 15;
    if (kind == ExperimentKind::ThresholdSweep) e.grid = {1.5, 3.0};
    if (kind == ExperimentKind::PowerSweep) {
        e.users = 2;
        e.eves = 1;
        e.grid = {20.0, 30.0};
    }
    if (kind == ExperimentKind::TimingSweep) {
        e.grid = {2.0, 3.0};
        e.trials = 2;
    }
    return e;
}

bool same_records(const RunResult& a, const RunResult& b) {
    if (a.trials.size() != b.trials.size()) return false;
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        const auto &x = a.trials[i], &y = b.trials[i];
        if (x.x != y.x || x.trial != y.trial || x.channel_seed != y.channel_seed || x.placement_seed != y.placement_seed ||
            x.ao_secrecy != y.ao_secrecy || x.ao_certified != y.ao_certified || x.ao_iters != y.ao_iters ||
            x.ao_feasible != y.ao_feasible || x.du_secrecy != y.du_secrecy)
            return false;
    }
    return true;
}

std::string first_line(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    return line;
}

}  // namespace

TEST_SUITE("experiment") {
    TEST_CASE("rank correlation") {
        CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
        CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
        CHECK(spearman({1, 2, 3, 4}, {1, 5, 25, 125}) == doctest::Approx(1.0));
        const double tied = spearman({1, 2, 3, 4}, {1, 1, 2, 2});
        CHECK(tied > 0.8);
        CHECK(tied < 1.0);
    }

    TEST_CASE("RIS shapes") {
        CHECK(ris_shape(16) == std::pair{4, 4});
        CHECK(ris_shape(8) == std::pair{4, 2});
        CHECK(ris_shape(32) == std::pair{8, 4});
        CHECK(ris_shape(7) == std::pair{7, 1});
        for (int n : {8, 12, 18, 64}) {
            const auto [x, z] = ris_shape(n);
            CHECK(x * z == n);
            CHECK(x >= z);
        }
    }

    TEST_CASE("defaults and JSON round trip") {
        for (auto k : {ExperimentKind::PowerSweep, ExperimentKind::RisSweep, ExperimentKind::ThresholdSweep,
                       ExperimentKind::TimingSweep, ExperimentKind::Train, ExperimentKind::Validate}) {
            const Experiment e = Experiment::defaults(k);
            CHECK_NOTHROW(e.validate());
            CHECK(experiment_kind_from_string(to_string(k)) == k);
            const Experiment back = experiment_from_json(to_json(e));
            CHECK(to_json(back) == to_json(e));
            CHECK(config_hash(back) == config_hash(e));
        }
        CHECK(Experiment::defaults(ExperimentKind::PowerSweep).grid.size() == 7);
    }

    TEST_CASE("hash ignores bookkeeping but not the science") {
        Experiment a = Experiment::defaults(ExperimentKind::PowerSweep);
        Experiment b = a;
        b.out_dir = "elsewhere";
        b.workers = 3;
        CHECK(config_hash(a) == config_hash(b));
        b.seed = 2;
        CHECK(config_hash(a) != config_hash(b));
        CHECK(config_hash(a).size() == 16);
    }

    TEST_CASE("invalid configurations") {
        CHECK_THROWS_AS(experiment_kind_from_string("banana"), Error);
        CHECK_THROWS_AS(experiment_from_json({{"kind", "power_sweep"}, {"grid", nlohmann::json::array()}}), Error);
        CHECK_THROWS_AS(experiment_from_json({{"kind", "power_sweep"}, {"trials", 0}}), Error);
        CHECK_THROWS_AS(experiment_from_json({{"scene_overrides", {{"bogus", {{"x", 1}}}}}}), Error);
        CHECK_THROWS_AS(experiment_from_json({{"scene_overrides", {{"system", {{"eps_typo", 1}}}}}}), Error);
        CHECK_NOTHROW(experiment_from_json({{"scene_overrides", {{"system", {{"power_budget_dbm", 30}}}}}}));
    }

    TEST_CASE("trial seeds are shared across the grid") {
        const Experiment e = tiny(ExperimentKind::PowerSweep);
        CHECK(trial_channel_seed(e, 0) != trial_channel_seed(e, 1));
        const Scene a = trial_scene(e, 20.0, 1), b = trial_scene(e, 30.0, 1);
        CHECK(a.user_positions == b.user_positions);
        CHECK(a.power_budget < b.power_budget);
        CHECK(b.power_budget == doctest::Approx(1.0));
    }

    TEST_CASE("sweep is reproducible and independent of the worker count") {
        const Experiment e = tiny(ExperimentKind::ThresholdSweep);
        const RunResult a = run_sweep(e);
        Experiment e2 = e;
        e2.workers = 2;
        const RunResult b = run_sweep(e2);
        CHECK(a.trials.size() == 4);
        CHECK(a.points.size() == 2);
        CHECK(same_records(a, b));
        CHECK(a.trend_metric == "certified");
        CHECK(a.trend_direction == -1);
        CHECK(a.spearman_rho == b.spearman_rho);
    }

    TEST_CASE("model with the wrong shape is skipped with a notice") {
        const Experiment e = tiny(ExperimentKind::ThresholdSweep);
        const ChannelSet other = build_channels(Scene::defaults(5, 1), 1);
        const DuNet net = DuNet::initial(DimensionBinding::of(other), 1);
        const RunResult r = run_sweep(e, &net);
        CHECK_FALSE(r.notices.empty());
        for (const auto& t : r.trials) CHECK_FALSE(t.has_dunet);
    }

    TEST_CASE("outputs carry the configuration hash") {
        const Experiment e = tiny(ExperimentKind::PowerSweep);
        const auto dir = std::filesystem::temp_directory_path() / "risec_exp_test";
        std::filesystem::remove_all(dir);
        const ChannelSet ch = build_channels(trial_scene(e, 20.0, 0), trial_channel_seed(e, 0));
        const DuNet net = DuNet::initial(DimensionBinding::of(ch), 2);
        const RunResult r = run_sweep(e, &net);
        for (const auto& t : r.trials) CHECK(t.has_dunet);
        write_outputs(r, dir.string());
        const std::string hash = config_hash(e);
        for (const char* f : {"points.csv", "trials.csv"}) {
            const std::string line = first_line(dir / f);
            CHECK(line.rfind("# schema=", 0) == 0);
            CHECK(line.find(hash) != std::string::npos);
        }
        std::ifstream mf(dir / "manifest.json");
        const auto m = nlohmann::json::parse(mf);
        CHECK(m.at("config_hash").get<std::string>() == hash);
        std::ifstream sf(dir / "summary.json");
        CHECK(nlohmann::json::parse(sf).at("config_hash").get<std::string>() == hash);

        const RunResult again = run_sweep(e, &net);
        CHECK(same_records(r, again));
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("timing rows") {
        const Experiment e = tiny(ExperimentKind::TimingSweep);
        const TimingResult a = run_timing(e);
        REQUIRE(a.rows.size() == 2);
        CHECK(a.rows[0].users == 2);
        CHECK(a.rows[1].users == 3);
        for (const auto& r : a.rows) {
            CHECK(r.ao_median > 0.0);
            CHECK(r.du_median > 0.0);
        }
        const TimingResult b = run_timing(e);
        for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].ao_iters_total == b.rows[i].ao_iters_total);
    }
}
