#include "risec/metrics.hpp"

#include <sstream>

#include "risec/linalg.hpp"

namespace risec {

void HardwareProfile::validate() const {
    if (!(upsilon >= 0.0 && upsilon <= 1.0)) throw Error(ErrorKind::Config, "upsilon must lie in [0,1]");
}

CVec Design::theta() const {
    CVec t(phases.size());
    for (Eigen::Index m = 0; m < phases.size(); ++m) t(m) = std::polar(1.0, phases(m));
    return t;
}

CMat Design::covariance(int k, int bs_antennas) const {
    const auto i = static_cast<std::size_t>(k);
    if (!q.empty()) return linalg::partial_trace_streams(q.at(i), bs_antennas);
    return w.at(i) * w.at(i).adjoint();
}

std::vector<CMat> Design::covariances(int bs_antennas) const {
    std::vector<CMat> out;
    for (int k = 0; k < num_users(); ++k) out.push_back(covariance(k, bs_antennas));
    return out;
}

double Design::total_power(int bs_antennas) const {
    double p = 0.0;
    for (int k = 0; k < num_users(); ++k) p += linalg::real_trace(covariance(k, bs_antennas));
    return p;
}

Design Design::zeros(int users, int bs_antennas, int streams, int ris_elements) {
    Design d;
    for (int k = 0; k < users; ++k) d.w.push_back(CMat::Zero(bs_antennas, streams));
    d.phases = RVec::Zero(ris_elements);
    return d;
}

CMat effective_channel(const ChannelSet& channels, const CVec& theta, Receiver rx) {
    const auto i = static_cast<std::size_t>(rx.index);
    const CMat& h = rx.eve ? channels.h_be.at(i) : channels.h_bk.at(i);
    const CMat& g = rx.eve ? channels.g_e.at(i) : channels.g_k.at(i);
    if (theta.size() != channels.ris_elements()) throw Error(ErrorKind::Dimension, "phase vector length != J");
    return h.adjoint() + apply_cascade(g, theta, channels.bs_antennas());
}

CMat effective_channel(const ChannelSet& channels, const Design& design, Receiver rx) {
    return effective_channel(channels, design.theta(), rx);
}

double SinrTerms::sinr() const {
    const double den = interference + distortion + noise;
    if (signal <= 0.0) return 0.0;
    return signal / den;
}

namespace {

// Tr(R C) and Tr(R diag(C)) for Hermitian R, C.
double tr_prod(const CMat& r, const CMat& c) { return (r.cwiseProduct(c.transpose())).sum().real(); }
double tr_diag(const CMat& r, const CMat& c) { return (r.diagonal().cwiseProduct(c.diagonal())).sum().real(); }

}  // namespace

SinrTerms sinr_terms(const CMat& h_eff, const std::vector<CMat>& cov, int stream, double upsilon, double noise_power) {
    const CMat r = h_eff.adjoint() * h_eff;
    const double imp = (1.0 + upsilon) * upsilon;
    SinrTerms t;
    for (std::size_t j = 0; j < cov.size(); ++j) {
        const double full = tr_prod(r, cov[j]);
        const double diag = tr_diag(r, cov[j]);
        if (static_cast<int>(j) == stream) {
            t.signal = std::max(full, 0.0);
            t.distortion = std::max(upsilon * full + imp * diag, 0.0);
        } else {
            t.interference += std::max(full + imp * diag, 0.0);
        }
    }
    t.noise = (1.0 + upsilon) * noise_power * static_cast<double>(h_eff.rows());
    return t;
}

double distortion(const ChannelSet& channels, const Design& design, const HardwareProfile& hw, Receiver rx, int stream) {
    hw.validate();
    const CMat h = effective_channel(channels, design, rx);
    return sinr_terms(h, design.covariances(channels.bs_antennas()), stream, hw.upsilon, 0.0).distortion;
}

double sinr(const ChannelSet& channels, const Design& design, const HardwareProfile& hw, const NoiseLevels& noise,
            Receiver rx, int stream) {
    hw.validate();
    const CMat h = effective_channel(channels, design, rx);
    const double n = rx.eve ? noise.eve : noise.user;
    return sinr_terms(h, design.covariances(channels.bs_antennas()), stream, hw.upsilon, n).sinr();
}

RateReport secrecy_report(const ChannelSet& channels, const std::vector<CMat>& cov, const CVec& theta,
                          const HardwareProfile& hw, const NoiseLevels& noise, const std::vector<int>& pairing) {
    const int k_users = channels.num_users();
    if (static_cast<int>(pairing.size()) != k_users || static_cast<int>(cov.size()) != k_users)
        throw Error(ErrorKind::Dimension, "pairing/covariances must cover every user");
    RateReport rep;
    rep.gamma_user.resize(k_users);
    rep.gamma_eve.resize(k_users);
    std::vector<CMat> h_eve;
    for (int e = 0; e < channels.num_eves(); ++e) h_eve.push_back(effective_channel(channels, theta, Receiver::eavesdropper(e)));
    for (int k = 0; k < k_users; ++k) {
        const CMat hk = effective_channel(channels, theta, Receiver::user(k));
        rep.gamma_user(k) = sinr_terms(hk, cov, k, hw.upsilon, noise.user).sinr();
        const int e = pairing[static_cast<std::size_t>(k)];
        rep.gamma_eve(k) = sinr_terms(h_eve.at(static_cast<std::size_t>(e)), cov, k, hw.upsilon, noise.eve).sinr();
    }
    rep.rate_user = rep.gamma_user.unaryExpr([](double g) { return rate_from_sinr(g); });
    rep.rate_eve = rep.gamma_eve.unaryExpr([](double g) { return rate_from_sinr(g); });
    rep.secrecy = rep.rate_user - rep.rate_eve;
    rep.secrecy_clipped = rep.secrecy.cwiseMax(0.0);
    rep.sum_secrecy = rep.secrecy.sum();
    rep.sum_secrecy_clipped = rep.secrecy_clipped.sum();
    return rep;
}

RateReport secrecy_report(const ChannelSet& channels, const Design& design, const HardwareProfile& hw,
                          const NoiseLevels& noise, const std::vector<int>& pairing) {
    hw.validate();
    return secrecy_report(channels, design.covariances(channels.bs_antennas()), design.theta(), hw, noise, pairing);
}

std::string RateReport::csv_header(int users) {
    std::ostringstream os;
    os << "sum_secrecy,sum_secrecy_clipped";
    for (int k = 0; k < users; ++k)
        os << ",gamma_user_" << k << ",gamma_eve_" << k << ",rate_user_" << k << ",rate_eve_" << k << ",secrecy_" << k;
    return os.str();
}

std::string RateReport::csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << sum_secrecy << ',' << sum_secrecy_clipped;
    for (Eigen::Index k = 0; k < secrecy.size(); ++k)
        os << ',' << gamma_user(k) << ',' << gamma_eve(k) << ',' << rate_user(k) << ',' << rate_eve(k) << ',' << secrecy(k);
    return os.str();
}

}  // namespace risec
