#include <doctest.h>

#include "helpers.hpp"

using namespace risec;

TEST_SUITE("scene") {
    TEST_CASE("vertical link has unit elevation cosine") {
        Scene s = Scene::defaults(1, 1);
        s.bs_position = {0, 0, 10};
        s.ris_position = {0, 0, 0};
        const auto g = link_geometry(s, {NodeKind::Bs, 0}, {NodeKind::Ris, 0});
        CHECK(g.distance == doctest::Approx(10.0));
        CHECK(std::cos(g.arrival_elevation) == doctest::Approx(1.0));
    }

    TEST_CASE("3-4-5 triangle") {
        Scene s = Scene::defaults(1, 1);
        s.bs_position = {3, 4, 0};
        s.user_positions = {{0, 0}};
        CHECK(link_geometry(s, {NodeKind::Bs, 0}, {NodeKind::User, 0}).distance == doctest::Approx(5.0));
    }

    TEST_CASE("default scene distances are finite, positive and symmetric") {
        const Scene s = Scene::defaults(8, 4);
        std::vector<NodeRef> nodes{{NodeKind::Bs, 0}, {NodeKind::Ris, 0}};
        for (int k = 0; k < 8; ++k) nodes.push_back({NodeKind::User, k});
        for (int e = 0; e < 4; ++e) nodes.push_back({NodeKind::Eve, e});
        for (std::size_t a = 0; a < nodes.size(); ++a)
            for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                const auto ab = link_geometry(s, nodes[a], nodes[b]);
                const auto ba = link_geometry(s, nodes[b], nodes[a]);
                CHECK(std::isfinite(ab.distance));
                CHECK(ab.distance > 0.0);
                CHECK(ab.distance == ba.distance);
                // direction cosines lie on the unit sphere
                for (const auto [az, el] : {std::pair{ab.arrival_azimuth, ab.arrival_elevation},
                                            std::pair{ab.departure_azimuth, ab.departure_elevation}}) {
                    const double sx = std::sin(el) * std::cos(az), sy = std::sin(el) * std::sin(az);
                    CHECK(std::abs(sx * sx + sy * sy + std::cos(el) * std::cos(el) - 1.0) < 1e-12);
                }
            }
    }

    TEST_CASE("coincident endpoints are degenerate") {
        Scene s = Scene::defaults(1, 1);
        s.user_positions = {{s.bs_position[0], s.bs_position[1]}};
        s.bs_position[2] = 0.0;
        CHECK_THROWS_AS(link_geometry(s, {NodeKind::Bs, 0}, {NodeKind::User, 0}), Error);
    }

    TEST_CASE("placement is deterministic and stays in the disc") {
        Placement pl;
        pl.seed = 11;
        const auto a = drop_in_disc(20, pl, 1, {50, 0, 10});
        const auto b = drop_in_disc(20, pl, 1, {50, 0, 10});
        CHECK(a == b);
        for (const auto& p : a) CHECK(std::hypot(p[0] - pl.center[0], p[1] - pl.center[1]) <= pl.radius + 1e-12);
        pl.seed = 12;
        CHECK(drop_in_disc(20, pl, 1, {50, 0, 10}) != a);
    }

    TEST_CASE("pairing splits users into groups") {
        CHECK(group_pairing(8, 4) == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
        CHECK(group_pairing(3, 1) == std::vector<int>{0, 0, 0});
    }

    TEST_CASE("json round trip keeps every field") {
        Scene s = Scene::defaults(3, 2);
        s.power_budget = 0.3;
        s.ris_jx = 5;
        s.direct_blockage_db = 12;
        const Scene r = scene_from_json(scene_to_json(s));
        CHECK(scene_to_json(r) == scene_to_json(s));
    }

    TEST_CASE("json counts drop nodes by the placement section") {
        nlohmann::json j = {{"geometry", {{"users", 3}, {"eves", 1}, {"placement", {{"seed", 5}}}}},
                            {"system", {{"power_budget_dbm", 20.0}}}};
        const Scene s = scene_from_json(j);
        CHECK(s.num_users() == 3);
        CHECK(s.num_eves() == 1);
        CHECK(s.power_budget == doctest::Approx(0.1));
        CHECK(scene_to_json(scene_from_json(j)) == scene_to_json(s));
    }

    TEST_CASE("validation rejects broken scenes") {
        Scene s = Scene::defaults(2, 1);
        CHECK_NOTHROW(s.validate());
        Scene bad = s;
        bad.eps_eve = 3.0;
        CHECK_THROWS_AS(bad.validate(), Error);
        bad = s;
        bad.pairing = {0, 1};
        CHECK_THROWS_AS(bad.validate(), Error);
        bad = s;
        bad.outage = 1.0;
        CHECK_THROWS_AS(bad.validate(), Error);
        bad = s;
        bad.pathloss_direct = 1.5;
        CHECK_THROWS_AS(bad.validate(), Error);
    }
}
