#pragma once

#include <string>
#include <vector>

#include "risec/channel.hpp"
#include "risec/common.hpp"
#include "risec/scene.hpp"

namespace risec {

/// Transmit-side impairment: distortion noise with covariance
/// upsilon * diag(sum_i w_i w_i^H).
struct HardwareProfile {
    double upsilon = 0.0;
    void validate() const;
};

/// Decision variables. `q` (lifted covariances of vec(w_k), size N_B N_K) is
/// optional; when present it is the representation the metrics read.
struct Design {
    std::vector<CMat> w;  // N_B x N_K per user
    std::vector<CMat> q;  // (N_B N_K) x (N_B N_K) per user, may be empty
    RVec phases;          // omega, length J

    CVec theta() const;
    int num_users() const { return static_cast<int>(w.empty() ? q.size() : w.size()); }
    /// C_k = w_k w_k^H, or the stream partial trace of Q_k.
    CMat covariance(int k, int bs_antennas) const;
    std::vector<CMat> covariances(int bs_antennas) const;
    double total_power(int bs_antennas) const;

    /// Zero-power design with all phases zero.
    static Design zeros(int users, int bs_antennas, int streams, int ris_elements);
};

struct NoiseLevels {
    double user = 1e-11;
    double eve = 1e-11;
    static NoiseLevels from(const Scene& s) { return {s.noise_user, s.noise_eve}; }
};

struct Receiver {
    bool eve = false;
    int index = 0;
    static Receiver user(int k) { return {false, k}; }
    static Receiver eavesdropper(int e) { return {true, e}; }
};

/// h^H + G (I (x) theta): N_K x N_B for users, N_E x N_B for eves.
CMat effective_channel(const ChannelSet& channels, const CVec& theta, Receiver rx);
CMat effective_channel(const ChannelSet& channels, const Design& design, Receiver rx);

/// Power terms seen at one receiver for the message of user `stream`, all in
/// trace form over the receive antennas.
struct SinrTerms {
    double signal = 0.0;
    double interference = 0.0;
    double distortion = 0.0;
    double noise = 0.0;
    double sinr() const;
};

SinrTerms sinr_terms(const CMat& h_eff, const std::vector<CMat>& cov, int stream, double upsilon, double noise_power);

double distortion(const ChannelSet& channels, const Design& design, const HardwareProfile& hw, Receiver rx, int stream);
double sinr(const ChannelSet& channels, const Design& design, const HardwareProfile& hw, const NoiseLevels& noise,
            Receiver rx, int stream);

inline double rate_from_sinr(double g) { return std::log2(1.0 + g); }

struct RateReport {
    RVec gamma_user;
    RVec gamma_eve;  // paired eavesdropper, for user k's message
    RVec rate_user;
    RVec rate_eve;
    RVec secrecy;          // raw r_k - r_e
    RVec secrecy_clipped;  // max(r_k - r_e, 0)
    double sum_secrecy = 0.0;
    double sum_secrecy_clipped = 0.0;

    static std::string csv_header(int users);
    std::string csv_row() const;
};

RateReport secrecy_report(const ChannelSet& channels, const Design& design, const HardwareProfile& hw,
                          const NoiseLevels& noise, const std::vector<int>& pairing);

/// Same as secrecy_report but from explicit covariances and phase vector.
RateReport secrecy_report(const ChannelSet& channels, const std::vector<CMat>& cov, const CVec& theta,
                          const HardwareProfile& hw, const NoiseLevels& noise, const std::vector<int>& pairing);

}  // namespace risec
