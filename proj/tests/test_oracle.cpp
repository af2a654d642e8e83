#include <doctest.h>

#include "helpers.hpp"
#include "risec/oracle.hpp"

using namespace risec;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("oracle") {
    TEST_CASE("without a usable RIS path the winner is the matched filter at full power") {
        Scene s = test::toy_scene(1, 1, 2, 1, 1, 5);
        s.pathloss_ris = 20.0;
        s.eve_positions = {{400.0, 300.0}};
        const ChannelSet ch = build_channels(s, 8);
        const Problem p = test::problem_for(s, ch, 0.0, 0.0);
        OracleConfig cfg;
        cfg.phase_levels = 1;
        cfg.power_steps = 8;
        const OracleResult r = grid_search(p, cfg);
        REQUIRE(r.found);
        const CVec h = ch.h_bk[0].col(0);
        const CVec w = r.design.w[0].col(0);
        CHECK(std::abs(h.dot(w)) / (h.norm() * w.norm()) >= 0.999);
        CHECK(r.design.total_power(p.bs()) == doctest::Approx(p.power_budget).epsilon(1e-9));
        CHECK(r.power_scale == 1.0);
    }

    TEST_CASE("one phase level keeps every element at zero") {
        const Scene s = test::toy_scene(1, 1, 2, 2, 2);
        const ChannelSet ch = build_channels(s, 3);
        const Problem p = test::problem_for(s, ch);
        OracleConfig cfg;
        cfg.phase_levels = 1;
        cfg.power_steps = 4;
        const OracleResult r = grid_search(p, cfg);
        for (Eigen::Index m = 0; m < r.design.phases.size(); ++m) CHECK(r.design.phases(m) == 0.0);
        CHECK(r.visited == static_cast<long long>(oracle_points(p, cfg)));
    }

    TEST_CASE("point count") {
        const Scene s = test::toy_scene(2, 1, 2, 2, 1);
        const ChannelSet ch = build_channels(s, 3);
        const Problem p = test::problem_for(s, ch);
        OracleConfig cfg;
        cfg.phase_levels = 4;
        cfg.power_steps = 3;
        // 4^2 phases, 3^2 directions, C(5, 2) power splits
        CHECK(oracle_points(p, cfg) == 16.0 * 9.0 * 10.0);
        const OracleResult r = grid_search(p, cfg);
        CHECK(r.visited == 1440);
        CHECK(r.feasible_points <= r.visited);
    }

    TEST_CASE("search is deterministic") {
        const Scene s = test::toy_scene(1, 1, 2, 2, 2, 2);
        const ChannelSet ch = build_channels(s, 4);
        const Problem p = test::problem_for(s, ch);
        OracleConfig cfg;
        cfg.phase_levels = 4;
        cfg.power_steps = 8;
        const OracleResult a = grid_search(p, cfg), b = grid_search(p, cfg);
        CHECK(a.objective == b.objective);
        CHECK(a.phase_digits == b.phase_digits);
        CHECK(a.power_units == b.power_units);
        CHECK(a.directions == b.directions);
    }

    TEST_CASE("refining the grid never lowers the optimum") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const Scene s = test::toy_scene(1, 1, 2, 2, 2, seed);
            const ChannelSet ch = build_channels(s, seed + 10);
            const Problem p = test::problem_for(s, ch);
            OracleConfig coarse;
            coarse.phase_levels = 4;
            coarse.power_steps = 4;
            OracleConfig finer_phase = coarse, finer_power = coarse;
            finer_phase.phase_levels = 8;
            finer_power.power_steps = 8;
            const double base = grid_search(p, coarse).objective;
            CHECK(grid_search(p, finer_phase).objective >= base - 1e-12);
            CHECK(grid_search(p, finer_power).objective >= base - 1e-12);
        }
    }

    TEST_CASE("instance caps and point budget") {
        OracleConfig cfg;
        {
            const Scene s = test::toy_scene(3, 1, 2, 2, 1);
            const ChannelSet ch = build_channels(s, 1);
            const Problem p = test::problem_for(s, ch);
            CHECK(kind_of([&] { oracle_points(p, cfg); }) == ErrorKind::CapExceeded);
        }
        {
            const Scene s = test::toy_scene(1, 1, 4, 2, 1);
            const ChannelSet ch = build_channels(s, 1);
            const Problem p = test::problem_for(s, ch);
            CHECK(kind_of([&] { oracle_points(p, cfg); }) == ErrorKind::CapExceeded);
        }
        {
            const Scene s = test::toy_scene(1, 1, 2, 7, 1);
            const ChannelSet ch = build_channels(s, 1);
            const Problem p = test::problem_for(s, ch);
            CHECK(kind_of([&] { oracle_points(p, cfg); }) == ErrorKind::CapExceeded);
        }
        {
            const Scene s = test::toy_scene(2, 2, 2, 3, 2);
            const ChannelSet ch = build_channels(s, 1);
            const Problem p = test::problem_for(s, ch);
            OracleConfig tight = cfg;
            tight.max_points = 1e6;
            CHECK(kind_of([&] { grid_search(p, tight); }) == ErrorKind::CapExceeded);
        }
        OracleConfig bad;
        bad.phase_levels = 0;
        CHECK_THROWS_AS(bad.validate(), Error);
    }

    TEST_CASE("gap report") {
        const GapReport same = compare(3.0, true, 3.0, true);
        CHECK(same.relative_gap == 0.0);
        const GapReport shortfall = compare(2.7, true, 3.0, true);
        CHECK(shortfall.relative_gap == doctest::Approx(0.1));
        CHECK(compare(3.3, true, 3.0, true).relative_gap == doctest::Approx(-0.1));
        CHECK(std::isfinite(compare(1.0, true, 0.0, false).relative_gap));
        const auto j = to_json(shortfall);
        CHECK(j.at("relative_gap").get<double>() == doctest::Approx(0.1));
    }

    TEST_CASE("result serializes") {
        const Scene s = test::toy_scene(1, 1, 2, 1, 1);
        const ChannelSet ch = build_channels(s, 2);
        const Problem p = test::problem_for(s, ch);
        OracleConfig cfg;
        cfg.phase_levels = 2;
        cfg.power_steps = 4;
        const OracleResult r = grid_search(p, cfg);
        const auto j = to_json(r, cfg);
        CHECK(j.at("visited").get<long long>() == r.visited);
        CHECK(j.at("found").get<bool>() == r.found);
    }
}
