#include "risec/channel.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace risec {

namespace {

enum Stream : std::uint64_t { kUserDirect = 10, kEveDirect = 11, kBsRis = 12, kRisUser = 13, kRisEve = 14 };

double rms(const CMat& m) { return m.size() ? m.norm() / std::sqrt(static_cast<double>(m.size())) : 0.0; }

}  // namespace

UncertaintyModel UncertaintyModel::relative(const ChannelSet& channels, double rel_direct, double rel_cascaded) {
    double h = 0.0, g = 0.0;
    for (const auto& m : channels.h_be) h += rms(m);
    for (const auto& m : channels.g_e) g += rms(m);
    const double n = std::max(1, channels.num_eves());
    return {rel_direct * h / n, rel_cascaded * g / n};
}

CVec steering_ula(int n, double spacing, double wavelength, double direction_cosine) {
    CVec a(n);
    const double step = -2.0 * kPi / wavelength * spacing * direction_cosine;
    for (int m = 0; m < n; ++m) a(m) = std::polar(1.0, step * m);
    return a;
}

CVec steering_upa(int jx, int jz, double dx, double dz, double wavelength, double sin_cos, double cos_elev) {
    const CVec ax = steering_ula(jx, dx, wavelength, sin_cos);
    const CVec az = steering_ula(jz, dz, wavelength, cos_elev);
    CVec a(jx * jz);
    for (int i = 0; i < jx; ++i)
        for (int k = 0; k < jz; ++k) a(i * jz + k) = ax(i) * az(k);
    return a;
}

CMat rician_mix(const CMat& los, double rician, double pathgain, Rng& rng) {
    const double los_w = std::sqrt(rician / (rician + 1.0));
    const double nlos_w = std::sqrt(1.0 / (rician + 1.0));
    const CMat nlos = complex_gaussian_matrix(los.rows(), los.cols(), rng);
    return std::sqrt(pathgain) * (los_w * los + nlos_w * nlos);
}

CMat cascade(const CMat& h_r, const CMat& h_br) {
    const Eigen::Index j = h_r.rows(), nrx = h_r.cols(), nb = h_br.cols();
    CMat g(nrx, nb * j);
    for (Eigen::Index r = 0; r < nrx; ++r)
        for (Eigen::Index b = 0; b < nb; ++b)
            for (Eigen::Index m = 0; m < j; ++m) g(r, b * j + m) = std::conj(h_r(m, r)) * h_br(m, b);
    return g;
}

CMat lifted_phase(const CVec& theta, int bs_antennas) {
    const Eigen::Index j = theta.size();
    CMat t = CMat::Zero(j * bs_antennas, bs_antennas);
    for (int b = 0; b < bs_antennas; ++b) t.block(b * j, b, j, 1) = theta;
    return t;
}

CMat apply_cascade(const CMat& g, const CVec& theta, int bs_antennas) {
    const Eigen::Index j = theta.size();
    CMat out(g.rows(), bs_antennas);
    for (int b = 0; b < bs_antennas; ++b) out.col(b) = g.middleCols(b * j, j) * theta;
    return out;
}

ChannelSet build_channels(const Scene& scene, std::uint64_t seed) {
    scene.validate();
    ChannelSet cs;
    cs.rng_seed = seed;
    const int nb = scene.n_bs_antennas, nk = scene.n_user_antennas, ne = scene.n_eve_antennas;
    const double lam = scene.wavelength;
    const double blockage = db_to_linear(-scene.direct_blockage_db);
    const NodeRef bs{NodeKind::Bs, 0};
    const NodeRef ris{NodeKind::Ris, 0};

    auto ris_response = [&](NodeRef node) {
        const auto c = ris_direction_cosines(scene, node);
        return steering_upa(scene.ris_jx, scene.ris_jz, scene.spacing_ris_x, scene.spacing_ris_z, lam, c[0], c[1]);
    };

    auto direct = [&](NodeRef node, int nrx, double spacing, Stream stream) {
        const LinkGeometry g = link_geometry(scene, bs, node);
        const CVec a_tx = steering_ula(nb, scene.spacing_bs, lam, g.departure_cosine());
        const CVec a_rx = steering_ula(nrx, spacing, lam, g.arrival_cosine());
        const CMat los = a_tx * a_rx.transpose();
        Rng rng(child_seed(seed, stream, static_cast<std::uint64_t>(node.index)));
        const double gain = scene.reference_gain * std::pow(g.distance, -scene.pathloss_direct) * blockage;
        return rician_mix(los, scene.rician_bs, gain, rng);
    };

    auto reflected = [&](NodeRef node, int nrx, double spacing, Stream stream) {
        const LinkGeometry g = link_geometry(scene, ris, node);
        const CVec a_ris = ris_response(node);
        const CVec a_rx = steering_ula(nrx, spacing, lam, g.arrival_cosine());
        const CMat los = a_ris * a_rx.transpose();
        Rng rng(child_seed(seed, stream, static_cast<std::uint64_t>(node.index)));
        const double gain = scene.reference_gain * std::pow(g.distance, -scene.pathloss_ris);
        return rician_mix(los, scene.rician_ris, gain, rng);
    };

    {
        const LinkGeometry g = link_geometry(scene, bs, ris);
        const CVec a_ris = ris_response(bs);
        const CVec a_bs = steering_ula(nb, scene.spacing_bs, lam, std::cos(g.bs_departure));
        const CMat los = a_ris * a_bs.transpose();
        Rng rng(child_seed(seed, kBsRis));
        const double gain = scene.reference_gain * std::pow(g.distance, -scene.pathloss_ris);
        cs.h_br = rician_mix(los, scene.rician_bs, gain, rng);
    }
    for (int k = 0; k < scene.num_users(); ++k) {
        const NodeRef u{NodeKind::User, k};
        cs.h_bk.push_back(direct(u, nk, scene.spacing_user, kUserDirect));
        cs.h_rk.push_back(reflected(u, nk, scene.spacing_user, kRisUser));
        cs.g_k.push_back(cascade(cs.h_rk.back(), cs.h_br));
    }
    for (int e = 0; e < scene.num_eves(); ++e) {
        const NodeRef v{NodeKind::Eve, e};
        cs.h_be.push_back(direct(v, ne, scene.spacing_eve, kEveDirect));
        cs.h_re.push_back(reflected(v, ne, scene.spacing_eve, kRisEve));
        cs.g_e.push_back(cascade(cs.h_re.back(), cs.h_br));
    }
    return cs;
}

EveError sample_eve_error(const CMat& h_be_hat, const CMat& g_e_hat, const UncertaintyModel& u, Rng& rng) {
    if (u.iota_direct < 0.0 || u.iota_cascaded < 0.0) throw Error(ErrorKind::Config, "uncertainty levels must be >= 0");
    EveError err;
    err.d_h = u.iota_direct * complex_gaussian_matrix(h_be_hat.rows(), h_be_hat.cols(), rng);
    err.d_g = u.iota_cascaded * complex_gaussian_matrix(g_e_hat.rows(), g_e_hat.cols(), rng);
    return err;
}

ChannelSet perturb_eve(const ChannelSet& channels, int eve, const EveError& err) {
    ChannelSet out = channels;
    auto& h = out.h_be.at(static_cast<std::size_t>(eve));
    auto& g = out.g_e.at(static_cast<std::size_t>(eve));
    if (h.rows() != err.d_h.rows() || h.cols() != err.d_h.cols() || g.rows() != err.d_g.rows() || g.cols() != err.d_g.cols())
        throw Error(ErrorKind::Dimension, "eve error does not match channel dimensions");
    h += err.d_h;
    g += err.d_g;
    return out;
}

// ---------------------------------------------------------------------------
// Archive: "RISCHAN1", u32 version, u32 K, E, N_B, N_K, N_E, J, u64 seed, then
// h_bk[K], h_be[E], h_br, h_rk[K], h_re[E], g_k[K], g_e[E], each column-major
// as little-endian (re, im) doubles.

namespace {

constexpr char kMagic[8] = {'R', 'I', 'S', 'C', 'H', 'A', 'N', '1'};
constexpr std::uint32_t kArchiveVersion = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U u = std::bit_cast<U>(v);
    unsigned char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename T>
T get_le(std::istream& is) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    unsigned char b[sizeof(U)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(U))) throw Error(ErrorKind::Io, "truncated channel archive");
    U u = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(b[i]) << (8 * i);
    return std::bit_cast<T>(u);
}

void put_matrix(std::ostream& os, const CMat& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            put_le(os, m(r, c).real());
            put_le(os, m(r, c).imag());
        }
}

CMat get_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
    CMat m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double re = get_le<double>(is);
            const double im = get_le<double>(is);
            m(r, c) = {re, im};
        }
    return m;
}

}  // namespace

void save_channels(const ChannelSet& cs, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    const std::uint32_t k = static_cast<std::uint32_t>(cs.num_users());
    const std::uint32_t e = static_cast<std::uint32_t>(cs.num_eves());
    const std::uint32_t nb = static_cast<std::uint32_t>(cs.bs_antennas());
    const std::uint32_t nk = k ? static_cast<std::uint32_t>(cs.h_bk[0].cols()) : 0;
    const std::uint32_t ne = e ? static_cast<std::uint32_t>(cs.h_be[0].cols()) : 0;
    const std::uint32_t j = static_cast<std::uint32_t>(cs.ris_elements());
    for (std::uint32_t v : {kArchiveVersion, k, e, nb, nk, ne, j}) put_le(os, v);
    put_le(os, cs.rng_seed);
    for (const auto& m : cs.h_bk) put_matrix(os, m);
    for (const auto& m : cs.h_be) put_matrix(os, m);
    put_matrix(os, cs.h_br);
    for (const auto& m : cs.h_rk) put_matrix(os, m);
    for (const auto& m : cs.h_re) put_matrix(os, m);
    for (const auto& m : cs.g_k) put_matrix(os, m);
    for (const auto& m : cs.g_e) put_matrix(os, m);
    if (!os) throw Error(ErrorKind::Io, "write failed for " + path);
}

ChannelSet load_channels(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(ErrorKind::Io, "not a channel archive: " + path);
    const auto version = get_le<std::uint32_t>(is);
    if (version != kArchiveVersion) throw Error(ErrorKind::Version, "unsupported channel archive version");
    const auto k = get_le<std::uint32_t>(is), e = get_le<std::uint32_t>(is), nb = get_le<std::uint32_t>(is);
    const auto nk = get_le<std::uint32_t>(is), ne = get_le<std::uint32_t>(is), j = get_le<std::uint32_t>(is);
    ChannelSet cs;
    cs.rng_seed = get_le<std::uint64_t>(is);
    for (std::uint32_t i = 0; i < k; ++i) cs.h_bk.push_back(get_matrix(is, nb, nk));
    for (std::uint32_t i = 0; i < e; ++i) cs.h_be.push_back(get_matrix(is, nb, ne));
    cs.h_br = get_matrix(is, j, nb);
    for (std::uint32_t i = 0; i < k; ++i) cs.h_rk.push_back(get_matrix(is, j, nk));
    for (std::uint32_t i = 0; i < e; ++i) cs.h_re.push_back(get_matrix(is, j, ne));
    for (std::uint32_t i = 0; i < k; ++i) cs.g_k.push_back(get_matrix(is, nk, nb * j));
    for (std::uint32_t i = 0; i < e; ++i) cs.g_e.push_back(get_matrix(is, ne, nb * j));
    return cs;
}

}  // namespace risec
