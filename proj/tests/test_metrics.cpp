#include <doctest.h>

#include "helpers.hpp"

using namespace risec;

namespace {

Design random_design(const ChannelSet& ch, int streams, Rng& rng) {
    std::normal_distribution<double> g;
    Design d = Design::zeros(ch.num_users(), ch.bs_antennas(), streams, ch.ris_elements());
    for (auto& w : d.w)
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = 0.1 * cd(g(rng), g(rng));
    d.phases = test::random_phases(ch.ris_elements(), rng);
    return d;
}

// Independent evaluation straight from the beamformers.
double brute_sinr(const CMat& h, const Design& d, int k, double u, double noise) {
    auto pw = [&](const CMat& w) { return (h * w).squaredNorm(); };
    auto dg = [&](const CMat& w) {
        double s = 0.0;
        for (Eigen::Index n = 0; n < w.rows(); ++n) s += h.col(n).squaredNorm() * w.row(n).squaredNorm();
        return s;
    };
    const double imp = (1.0 + u) * u;
    double interference = 0.0;
    for (std::size_t j = 0; j < d.w.size(); ++j)
        if (static_cast<int>(j) != k) interference += pw(d.w[j]) + imp * dg(d.w[j]);
    const double sig = pw(d.w[static_cast<std::size_t>(k)]);
    const double dist = u * sig + imp * dg(d.w[static_cast<std::size_t>(k)]);
    return sig / (interference + dist + (1.0 + u) * noise * static_cast<double>(h.rows()));
}

}  // namespace

TEST_SUITE("metrics") {
    TEST_CASE("effective channel without RIS is the direct link") {
        ChannelSet ch = build_channels(Scene::defaults(2, 1), 4);
        for (auto& g : ch.g_k) g.setZero();
        const CVec theta = CVec::Constant(ch.ris_elements(), cd(1.0, 0.0));
        const CMat h = effective_channel(ch, theta, Receiver::user(1));
        CHECK((h - ch.h_bk[1].adjoint()).norm() == 0.0);
        CHECK(h.rows() == ch.h_bk[1].cols());
        CHECK(h.cols() == ch.bs_antennas());
        CHECK(effective_channel(ch, theta, Receiver::eavesdropper(0)).rows() == ch.h_be[0].cols());
    }

    TEST_CASE("effective channel matches both sides of the cascade") {
        Rng rng(2);
        const ChannelSet ch = build_channels(Scene::defaults(2, 1), 4);
        const RVec w = test::random_phases(ch.ris_elements(), rng);
        CVec theta(w.size());
        for (Eigen::Index m = 0; m < w.size(); ++m) theta(m) = std::polar(1.0, w(m));
        const CMat expect = ch.h_bk[0].adjoint() + ch.h_rk[0].adjoint() * theta.asDiagonal() * ch.h_br;
        CHECK((effective_channel(ch, theta, Receiver::user(0)) - expect).norm() / expect.norm() < 1e-12);
    }

    TEST_CASE("distortion vanishes without impairment or signal") {
        Rng rng(5);
        const ChannelSet ch = build_channels(Scene::defaults(2, 1), 4);
        Design d = random_design(ch, 2, rng);
        CHECK(distortion(ch, d, HardwareProfile{0.0}, Receiver::user(0), 0) == 0.0);
        d.w[0].setZero();
        CHECK(distortion(ch, d, HardwareProfile{1.0}, Receiver::user(0), 0) == 0.0);
        CHECK(distortion(ch, d, HardwareProfile{1.0}, Receiver::user(0), 1) > 0.0);
    }

    TEST_CASE("sinr matches a dense evaluation") {
        Rng rng(6);
        const Scene s = Scene::defaults(3, 2);
        const ChannelSet ch = build_channels(s, 8);
        const NoiseLevels noise = NoiseLevels::from(s);
        for (double u : {0.0, 0.05, 0.3}) {
            const Design d = random_design(ch, 2, rng);
            for (int k = 0; k < 3; ++k) {
                const CMat h = effective_channel(ch, d, Receiver::user(k));
                const double expect = brute_sinr(h, d, k, u, noise.user);
                CHECK(sinr(ch, d, HardwareProfile{u}, noise, Receiver::user(k), k) ==
                      doctest::Approx(expect).epsilon(1e-10));
            }
        }
    }

    TEST_CASE("single link matched filter") {
        Scene s = test::toy_scene(1, 1, 3, 1, 1);
        ChannelSet ch = build_channels(s, 3);
        for (auto& g : ch.g_k) g.setZero();
        const CVec h = ch.h_bk[0].col(0);  // N_B x 1, receiver sees h^H
        Design d = Design::zeros(1, 3, 1, 1);
        const double p = 0.5;
        d.w[0].col(0) = std::sqrt(p) * h / h.norm();
        const double g = sinr(ch, d, HardwareProfile{0.0}, NoiseLevels::from(s), Receiver::user(0), 0);
        CHECK(g == doctest::Approx(h.squaredNorm() * p / s.noise_user).epsilon(1e-12));
        d.w[0].setZero();
        CHECK(sinr(ch, d, HardwareProfile{0.0}, NoiseLevels::from(s), Receiver::user(0), 0) == 0.0);
    }

    TEST_CASE("identical user and eve channels give equal sinr") {
        Rng rng(9);
        Scene s = Scene::defaults(2, 1);
        ChannelSet ch = build_channels(s, 1);
        ch.h_be[0] = ch.h_bk[0];
        ch.h_re[0] = ch.h_rk[0];
        ch.g_e[0] = ch.g_k[0];
        const Design d = random_design(ch, 2, rng);
        const auto rep = secrecy_report(ch, d, HardwareProfile{0.0}, NoiseLevels::from(s), s.pairing);
        CHECK(rep.gamma_user(0) == doctest::Approx(rep.gamma_eve(0)));
        CHECK(std::abs(rep.secrecy(0)) < 1e-12);
    }

    TEST_CASE("secrecy from rates") {
        CHECK(rate_from_sinr(3.0) - rate_from_sinr(1.0) == doctest::Approx(1.0));
        CHECK(rate_from_sinr(0.0) == 0.0);
    }

    TEST_CASE("impairment only lowers sinr and clipping is nonnegative") {
        Rng rng(10);
        const Scene s = Scene::defaults(3, 2);
        const ChannelSet ch = build_channels(s, 5);
        const Design d = random_design(ch, 2, rng);
        RateReport prev;
        for (double u : {0.0, 0.01, 0.05, 0.1, 0.5}) {
            const auto rep = secrecy_report(ch, d, HardwareProfile{u}, NoiseLevels::from(s), s.pairing);
            for (int k = 0; k < 3; ++k) {
                CHECK(rep.gamma_user(k) >= 0.0);
                CHECK(rep.secrecy_clipped(k) >= 0.0);
                CHECK(rep.secrecy_clipped(k) == std::max(rep.secrecy(k), 0.0));
                if (u > 0.0) CHECK(rep.gamma_user(k) <= prev.gamma_user(k));
            }
            prev = rep;
        }
    }

    TEST_CASE("scaling a lone beamformer never lowers its sinr") {
        Rng rng(12);
        const Scene s = test::toy_scene(1, 1, 4, 2, 2);
        const ChannelSet ch = build_channels(s, 2);
        Design d = random_design(ch, 1, rng);
        double last = 0.0;
        for (double c : {1.0, 1.5, 2.0, 4.0}) {
            Design dc = d;
            dc.w[0] *= c;
            const double g = sinr(ch, dc, HardwareProfile{0.0}, NoiseLevels::from(s), Receiver::user(0), 0);
            CHECK(g >= last);
            last = g;
        }
    }

    TEST_CASE("beamformer and lifted covariance agree") {
        Rng rng(13);
        const Scene s = Scene::defaults(2, 1);
        const ChannelSet ch = build_channels(s, 6);
        Design d = random_design(ch, 2, rng);
        Design q = d;
        for (const auto& w : d.w) {
            const CVec v = Eigen::Map<const CVec>(w.data(), w.size());
            q.q.push_back(v * v.adjoint());
        }
        q.w.clear();
        const auto a = secrecy_report(ch, d, HardwareProfile{0.1}, NoiseLevels::from(s), s.pairing);
        const auto b = secrecy_report(ch, q, HardwareProfile{0.1}, NoiseLevels::from(s), s.pairing);
        for (int k = 0; k < 2; ++k) {
            CHECK(a.gamma_user(k) == doctest::Approx(b.gamma_user(k)).epsilon(1e-9));
            CHECK(a.gamma_eve(k) == doctest::Approx(b.gamma_eve(k)).epsilon(1e-9));
        }
        CHECK(d.total_power(ch.bs_antennas()) == doctest::Approx(q.total_power(ch.bs_antennas())));
    }
}
