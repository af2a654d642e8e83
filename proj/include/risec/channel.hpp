#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risec/common.hpp"
#include "risec/scene.hpp"

namespace risec {

/// Every complex channel matrix of one realization.
///
/// Cascaded matrices use the column index n_b * J + j, with
///   G_k(n_k, n_b * J + j) = conj(h_Rk(j, n_k)) * h_BR(j, n_b),
/// so that G_k (I_{N_B} (x) theta) = h_Rk^H diag(theta) h_BR.
struct ChannelSet {
    std::vector<CMat> h_bk;  // N_B x N_K per user
    std::vector<CMat> h_be;  // N_B x N_E per eve
    CMat h_br;               // J x N_B
    std::vector<CMat> h_rk;  // J x N_K per user
    std::vector<CMat> h_re;  // J x N_E per eve
    std::vector<CMat> g_k;   // N_K x (N_B J) per user
    std::vector<CMat> g_e;   // N_E x (N_B J) per eve
    std::uint64_t rng_seed = 0;

    int num_users() const { return static_cast<int>(h_bk.size()); }
    int num_eves() const { return static_cast<int>(h_be.size()); }
    int bs_antennas() const { return static_cast<int>(h_br.cols()); }
    int ris_elements() const { return static_cast<int>(h_br.rows()); }
};

/// Channel-error levels of the eavesdropper estimates (absolute amplitudes).
struct UncertaintyModel {
    double iota_direct = 0.0;    // iota_{e,1}
    double iota_cascaded = 0.0;  // iota_{e,2}

    /// Levels set to `rel` times the RMS entry magnitude of the eve estimates.
    static UncertaintyModel relative(const ChannelSet& channels, double rel_direct, double rel_cascaded);
};

CVec steering_ula(int n, double spacing, double wavelength, double direction_cosine);

/// x-factor (x) z-factor, each a ULA response along its axis.
CVec steering_upa(int jx, int jz, double dx, double dz, double wavelength, double sin_cos, double cos_elev);

CMat rician_mix(const CMat& los, double rician, double pathgain, Rng& rng);

/// NLoS draws use one RNG stream per matrix family (and per node index), all
/// derived from `seed`, so adding eavesdroppers leaves user channels untouched.
ChannelSet build_channels(const Scene& scene, std::uint64_t seed);

/// (I_{N_B} (x) theta): the (N_B J) x N_B block selector applied with the
/// phase vector, i.e. Theta 1_F.
CMat lifted_phase(const CVec& theta, int bs_antennas);

/// G (I (x) theta), an N_rx x N_B matrix.
CMat apply_cascade(const CMat& g, const CVec& theta, int bs_antennas);

/// Build the cascaded matrix from h_R (J x N_rx) and h_BR (J x N_B).
CMat cascade(const CMat& h_r, const CMat& h_br);

struct EveError {
    CMat d_h;  // N_B x N_E
    CMat d_g;  // N_E x (N_B J)
};

EveError sample_eve_error(const CMat& h_be_hat, const CMat& g_e_hat, const UncertaintyModel& u, Rng& rng);

/// Channel copy with eve e's channels replaced by estimate + error.
ChannelSet perturb_eve(const ChannelSet& channels, int eve, const EveError& err);

void save_channels(const ChannelSet& channels, const std::string& path);
ChannelSet load_channels(const std::string& path);

}  // namespace risec
