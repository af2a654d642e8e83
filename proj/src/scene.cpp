#include "risec/scene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace risec {

namespace {

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::Config, msg);
}

}  // namespace

std::vector<int> group_pairing(int users, int eves) {
    std::vector<int> p(static_cast<std::size_t>(std::max(users, 0)), 0);
    if (eves <= 0) return p;
    for (int k = 0; k < users; ++k) p[static_cast<std::size_t>(k)] = static_cast<int>((static_cast<long>(k) * eves) / users);
    return p;
}

std::vector<Vec2> drop_in_disc(int count, const Placement& placement, std::uint64_t stream, const Vec3& ris) {
    Rng rng(child_seed(placement.seed, stream));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        const double r = placement.radius * std::sqrt(u(rng));
        const double a = 2.0 * kPi * u(rng);
        Vec2 p{placement.center[0] + r * std::cos(a), placement.center[1] + r * std::sin(a)};
        const double dx = p[0] - ris[0], dy = p[1] - ris[1];
        if (std::sqrt(dx * dx + dy * dy) < placement.min_ris_distance) continue;
        out.push_back(p);
    }
    return out;
}

Scene Scene::defaults(int users, int eves, const Placement& placement) {
    Scene s;
    s.user_positions = drop_in_disc(users, placement, 1, s.ris_position);
    s.eve_positions = drop_in_disc(eves, placement, 2, s.ris_position);
    s.pairing = group_pairing(users, eves);
    return s;
}

void Scene::validate() const {
    require(num_users() >= 1, "at least one user required");
    require(num_eves() >= 1, "at least one eavesdropper required");
    require(n_bs_antennas >= 1 && n_user_antennas >= 1 && n_eve_antennas >= 1, "antenna counts must be >= 1");
    require(ris_jx >= 1 && ris_jz >= 1, "RIS grid counts must be >= 1");
    require(wavelength > 0.0, "wavelength must be > 0");
    require(spacing_bs > 0 && spacing_user > 0 && spacing_eve > 0 && spacing_ris_x > 0 && spacing_ris_z > 0,
            "element spacings must be > 0");
    require(pathloss_direct > 2.0 && pathloss_ris > 2.0, "pathloss exponents must exceed 2");
    require(reference_gain > 0.0, "reference gain must be > 0");
    require(rician_bs >= 0.0 && rician_ris >= 0.0, "Rician factors must be >= 0");
    require(direct_blockage_db >= 0.0, "direct blockage loss must be >= 0 dB");
    require(power_budget > 0.0, "power budget must be > 0");
    require(noise_user > 0.0 && noise_eve > 0.0, "noise powers must be > 0");
    require(eps_eve > 0.0 && eps_eve < eps_user, "thresholds must satisfy 0 < eps_e < eps_k");
    require(tolerance > 0.0, "tolerance must be > 0");
    require(outage > 0.0 && outage < 1.0, "outage must lie in (0,1)");
    require(static_cast<int>(pairing.size()) == num_users(), "pairing must cover every user");
    for (int e : pairing) require(e >= 0 && e < num_eves(), "pairing refers to an unknown eavesdropper");
}

Vec3 node_position(const Scene& scene, NodeRef node) {
    switch (node.kind) {
        case NodeKind::Bs: return scene.bs_position;
        case NodeKind::Ris: return scene.ris_position;
        case NodeKind::User: {
            const auto& p = scene.user_positions.at(static_cast<std::size_t>(node.index));
            return {p[0], p[1], 0.0};
        }
        case NodeKind::Eve: {
            const auto& p = scene.eve_positions.at(static_cast<std::size_t>(node.index));
            return {p[0], p[1], 0.0};
        }
    }
    return {};
}

double LinkGeometry::departure_cosine() const { return std::cos(departure_azimuth) * std::sin(departure_elevation); }
double LinkGeometry::arrival_cosine() const { return std::cos(arrival_azimuth) * std::sin(arrival_elevation); }

LinkGeometry link_geometry(const Scene& scene, NodeRef a, NodeRef b) {
    const Vec3 pa = node_position(scene, a);
    const Vec3 pb = node_position(scene, b);
    const Vec3 diff{pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]};
    const double d = norm3(diff);
    if (!(d > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "coincident link endpoints");
    const double ux = diff[0] / d, uy = diff[1] / d, uz = std::clamp(diff[2] / d, -1.0, 1.0);
    LinkGeometry g;
    g.distance = d;
    g.departure_azimuth = std::atan2(uy, ux);
    g.departure_elevation = std::acos(uz);
    g.arrival_azimuth = std::atan2(-uy, -ux);
    g.arrival_elevation = std::acos(-uz);
    g.bs_departure = std::acos(std::clamp(ux, -1.0, 1.0));
    return g;
}

std::array<double, 2> ris_direction_cosines(const Scene& scene, NodeRef node) {
    const Vec3 r = scene.ris_position;
    const Vec3 p = node_position(scene, node);
    const Vec3 diff{p[0] - r[0], p[1] - r[1], p[2] - r[2]};
    const double d = norm3(diff);
    if (!(d > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "node coincides with the RIS");
    return {std::clamp((r[0] - p[0]) / d, -1.0, 1.0), std::clamp((p[2] - r[2]) / d, -1.0, 1.0)};
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

namespace {

json positions_to_json(const std::vector<Vec2>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p[0], p[1]});
    return a;
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json scene_to_json(const Scene& s) {
    json j;
    j["geometry"] = {
        {"bs_position", s.bs_position},
        {"ris_position", s.ris_position},
        {"users", positions_to_json(s.user_positions)},
        {"eves", positions_to_json(s.eve_positions)},
        {"pairing", s.pairing},
    };
    j["arrays"] = {
        {"n_bs_antennas", s.n_bs_antennas}, {"n_user_antennas", s.n_user_antennas},
        {"n_eve_antennas", s.n_eve_antennas}, {"ris_jx", s.ris_jx},
        {"ris_jz", s.ris_jz}, {"wavelength", s.wavelength},
        {"spacing_bs", s.spacing_bs}, {"spacing_user", s.spacing_user},
        {"spacing_eve", s.spacing_eve}, {"spacing_ris_x", s.spacing_ris_x},
        {"spacing_ris_z", s.spacing_ris_z},
    };
    j["propagation"] = {
        {"pathloss_direct", s.pathloss_direct}, {"pathloss_ris", s.pathloss_ris},
        {"reference_gain", s.reference_gain}, {"rician_bs", s.rician_bs},
        {"rician_ris", s.rician_ris}, {"direct_blockage_db", s.direct_blockage_db},
    };
    j["system"] = {
        {"power_budget_w", s.power_budget}, {"noise_user_w", s.noise_user},
        {"noise_eve_w", s.noise_eve}, {"eps_user", s.eps_user},
        {"eps_eve", s.eps_eve}, {"tolerance", s.tolerance},
        {"outage", s.outage},
    };
    return j;
}

Scene scene_from_json(const json& j) {
    Scene s;
    Placement placement;
    int users = 8, eves = 4;
    bool explicit_users = false, explicit_eves = false;

    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        get_if(g, "bs_position", s.bs_position);
        get_if(g, "ris_position", s.ris_position);
        if (g.contains("placement")) {
            const json& p = g.at("placement");
            get_if(p, "seed", placement.seed);
            get_if(p, "center", placement.center);
            get_if(p, "radius", placement.radius);
            get_if(p, "min_ris_distance", placement.min_ris_distance);
        }
        auto read_nodes = [&](const char* key, int& count, bool& is_explicit, std::vector<Vec2>& out) {
            if (!g.contains(key)) return;
            const json& v = g.at(key);
            if (v.is_number_integer()) {
                count = v.get<int>();
            } else {
                out = v.get<std::vector<Vec2>>();
                count = static_cast<int>(out.size());
                is_explicit = true;
            }
        };
        read_nodes("users", users, explicit_users, s.user_positions);
        read_nodes("eves", eves, explicit_eves, s.eve_positions);
    }
    if (!explicit_users) s.user_positions = drop_in_disc(users, placement, 1, s.ris_position);
    if (!explicit_eves) s.eve_positions = drop_in_disc(eves, placement, 2, s.ris_position);
    s.pairing = group_pairing(s.num_users(), s.num_eves());
    if (j.contains("geometry") && j.at("geometry").contains("pairing")) s.pairing = j["geometry"]["pairing"].get<std::vector<int>>();

    if (j.contains("arrays")) {
        const json& a = j.at("arrays");
        get_if(a, "n_bs_antennas", s.n_bs_antennas);
        get_if(a, "n_user_antennas", s.n_user_antennas);
        get_if(a, "n_eve_antennas", s.n_eve_antennas);
        get_if(a, "ris_jx", s.ris_jx);
        get_if(a, "ris_jz", s.ris_jz);
        get_if(a, "wavelength", s.wavelength);
        // spacings default to the stated fractions of the wavelength
        s.spacing_bs = s.wavelength / 2.0;
        s.spacing_user = s.wavelength / 2.0;
        s.spacing_eve = s.wavelength / 2.0;
        s.spacing_ris_x = s.wavelength / 4.0;
        s.spacing_ris_z = s.wavelength / 4.0;
        get_if(a, "spacing_bs", s.spacing_bs);
        get_if(a, "spacing_user", s.spacing_user);
        get_if(a, "spacing_eve", s.spacing_eve);
        get_if(a, "spacing_ris_x", s.spacing_ris_x);
        get_if(a, "spacing_ris_z", s.spacing_ris_z);
    }
    if (j.contains("propagation")) {
        const json& p = j.at("propagation");
        get_if(p, "pathloss_direct", s.pathloss_direct);
        get_if(p, "pathloss_ris", s.pathloss_ris);
        get_if(p, "reference_gain", s.reference_gain);
        get_if(p, "rician_bs", s.rician_bs);
        get_if(p, "rician_ris", s.rician_ris);
        get_if(p, "direct_blockage_db", s.direct_blockage_db);
    }
    if (j.contains("system")) {
        const json& y = j.at("system");
        get_if(y, "power_budget_w", s.power_budget);
        if (y.contains("power_budget_dbm")) s.power_budget = dbm_to_watt(y.at("power_budget_dbm").get<double>());
        get_if(y, "noise_user_w", s.noise_user);
        get_if(y, "noise_eve_w", s.noise_eve);
        if (y.contains("noise_dbm")) s.noise_user = s.noise_eve = dbm_to_watt(y.at("noise_dbm").get<double>());
        get_if(y, "eps_user", s.eps_user);
        get_if(y, "eps_eve", s.eps_eve);
        get_if(y, "tolerance", s.tolerance);
        get_if(y, "outage", s.outage);
    }
    s.validate();
    return s;
}

}  // namespace risec
