#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "risec/common.hpp"

namespace risec {

using Vec3 = std::array<double, 3>;
using Vec2 = std::array<double, 2>;

/// Where the default placement drops users and eavesdroppers: uniformly in a
/// disc on the ground plane.
struct Placement {
    std::uint64_t seed = 7;
    Vec2 center{50.0, 0.0};
    double radius = 50.0;
    double min_ris_distance = 0.0;
};

/// Static system configuration. Immutable once validated.
struct Scene {
    Vec3 bs_position{0.0, 0.0, 25.0};
    Vec3 ris_position{50.0, 0.0, 10.0};
    std::vector<Vec2> user_positions;
    std::vector<Vec2> eve_positions;

    int n_bs_antennas = 4;
    int n_user_antennas = 2;
    int n_eve_antennas = 2;
    int ris_jx = 4;
    int ris_jz = 4;

    double wavelength = 0.1;
    double spacing_bs = 0.05;
    double spacing_user = 0.05;
    double spacing_eve = 0.05;
    double spacing_ris_x = 0.025;
    double spacing_ris_z = 0.025;

    double pathloss_direct = 3.2;  // alpha: BS -> ground links
    double pathloss_ris = 3.2;     // kappa: every link touching the RIS
    double reference_gain = 1e-3;  // rho at d0 = 1 m
    double rician_bs = 4.0;        // R_{B,i}, i in {k, e, R}
    double rician_ris = 4.0;       // R_{R,i}, i in {k, e}
    double direct_blockage_db = 0.0;

    double power_budget = 1.0;  // W
    double noise_user = 1e-11;  // W
    double noise_eve = 1e-11;   // W
    double eps_user = 2.0;      // bits/s/Hz
    double eps_eve = 1.0;       // bits/s/Hz
    double tolerance = 1e-3;
    double outage = 0.05;

    /// pairing[k] = index of the eavesdropper that wiretaps user k.
    std::vector<int> pairing;

    int num_users() const { return static_cast<int>(user_positions.size()); }
    int num_eves() const { return static_cast<int>(eve_positions.size()); }
    int ris_elements() const { return ris_jx * ris_jz; }

    /// Throws Error(Config) on any violated invariant.
    void validate() const;

    /// Default system with K users and E eavesdroppers dropped by `placement`.
    static Scene defaults(int users, int eves, const Placement& placement = {});
};

/// Users split into E contiguous groups, one eavesdropper per group.
std::vector<int> group_pairing(int users, int eves);

std::vector<Vec2> drop_in_disc(int count, const Placement& placement, std::uint64_t stream, const Vec3& ris);

enum class NodeKind { Bs, Ris, User, Eve };

struct NodeRef {
    NodeKind kind;
    int index = 0;
};

Vec3 node_position(const Scene& scene, NodeRef node);

struct LinkGeometry {
    double distance = 0.0;
    double departure_azimuth = 0.0;    // varpi
    double departure_elevation = 0.0;  // zeta, measured from zenith
    double arrival_azimuth = 0.0;      // vartheta
    double arrival_elevation = 0.0;    // phi, measured from zenith
    double bs_departure = 0.0;         // theta, angle to the ULA axis (x)

    /// x-direction cosine of the departure direction, cos(varpi) sin(zeta).
    double departure_cosine() const;
    /// x-direction cosine of the arrival direction, cos(vartheta) sin(phi).
    double arrival_cosine() const;
};

LinkGeometry link_geometry(const Scene& scene, NodeRef a, NodeRef b);

/// RIS-side direction cosines (sin(phi) cos(varphi), cos(phi)) of the link
/// between the RIS and `node`: x uses (x_R - x_node)/d, z uses (z_node - z_R)/d.
std::array<double, 2> ris_direction_cosines(const Scene& scene, NodeRef node);

nlohmann::json scene_to_json(const Scene& scene);
/// Missing fields keep their defaults. If "users"/"eves" are counts rather than
/// position lists, positions are dropped by the placement section.
Scene scene_from_json(const nlohmann::json& j);

}  // namespace risec
