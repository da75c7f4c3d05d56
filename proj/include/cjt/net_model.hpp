// SPDX-License-Identifier: Apache-2.0
//
// cjt-precode: decentralized coherent joint transmission precoding
// Copyright (C) 2026 The cjt-precode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CJT_NET_MODEL_HPP
#define CJT_NET_MODEL_HPP

#include "cjt/rng.hpp"
#include "cjt/topology.hpp"
#include "cjt/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cjt
{
    // Per-(UE, BS) Hermitian PSD covariance Theta_ip, defined for every pair
    // including non-serving ones
    struct CovarianceSet
    {
        Index n_ue = 0;
        Index n_bs = 0;
        Index n_tx = 0;
        std::vector<CMat> theta; // ue * n_bs + bs

        CovarianceSet() = default;
        CovarianceSet(Index n_ue, Index n_bs, Index n_tx);

        const CMat &at(Index ue, Index bs) const { return theta.at(ue * n_bs + bs); }
        CMat &at(Index ue, Index bs) { return theta.at(ue * n_bs + bs); }

        // Throws NumericalFailure if some matrix is not Hermitian (1e-12) or
        // has an eigenvalue below -1e-10 * ||Theta||
        void validate() const;
    };

    // Per-(UE, BS) channel vectors h_ip, defined for every pair
    struct ChannelSet
    {
        Index n_ue = 0;
        Index n_bs = 0;
        Index n_tx = 0;
        std::vector<CVec> h; // ue * n_bs + bs

        ChannelSet() = default;
        ChannelSet(Index n_ue, Index n_bs, Index n_tx);

        const CVec &at(Index ue, Index bs) const { return h.at(ue * n_bs + bs); }
        CVec &at(Index ue, Index bs) { return h.at(ue * n_bs + bs); }
    };

    // Precoders w_ip for serving pairs, stacked in Topology::pairs() order
    struct PrecoderSet
    {
        std::vector<CVec> w;

        PrecoderSet() = default;
        PrecoderSet(const Topology &topology);

        const CVec &at(const Topology &t, Index ue, Index bs) const { return w.at(t.pair_at(ue, bs)); }
        CVec &at(const Topology &t, Index ue, Index bs) { return w.at(t.pair_at(ue, bs)); }
    };

    // How the log-norm average of the noise calibration is normalized
    enum class NoiseNormalization
    {
        Literal,    // (1/U_p) inside the sum over BSs, as printed
        TotalPairs  // divide the double sum by sum_p U_p
    };

    const char *to_string(NoiseNormalization mode);
    NoiseNormalization noise_normalization_from_string(const std::string &s);

    struct NoiseModel
    {
        double sigma2 = 1.0;
        double snr_db = 0.0;
        NoiseNormalization mode = NoiseNormalization::Literal;
    };

    // Target SINRs gamma_ip in serving-pair order
    struct TargetSinr
    {
        std::vector<double> gamma;

        double at(const Topology &t, Index ue, Index bs) const { return gamma.at(t.pair_at(ue, bs)); }

        // Throws InvalidArgument unless every entry is finite and > 0
        void validate(const Topology &t) const;
        TargetSinr scaled(double beta) const;
    };

    // UE drop and log-distance pathloss. BSs sit on a line, site_spacing
    // cell radii apart. A UE is dropped uniformly in a disc of one cell radius centred
    // on the centroid of its serving BSs, so jointly served UEs land between
    // their cells.
    struct Placement
    {
        double cell_radius = 1.0;
        double site_spacing = 2.0;      // in cell radii
        double min_distance = 0.25;     // in cell radii
        double pathloss_exponent = 3.0;
        double reference_gain = 1.0;    // gain at one cell radius
    };

    // n_ue x n_bs matrix of scalar pathloss gains g_ip
    RMat draw_pathloss_gains(const Topology &topology, const Placement &placement, std::uint64_t seed);

    // Exponential correlation C(rho)_ab = rho^|a-b|
    RMat exponential_correlation(Index n_tx, double rho);

    // Theta_ip = g_ip * C(rho)
    CovarianceSet synth_covariance(const Topology &topology, double corr, const RMat &gains);
    CovarianceSet synth_covariance(const Topology &topology, double corr, const Placement &placement,
                                   std::uint64_t seed);

    // PSD square root via Hermitian eigendecomposition, negative eigenvalues
    // clamped to zero
    CMat psd_sqrt(const CMat &theta);

    // h_ip = Theta_ip^{1/2} z_ip with z_ip ~ CN(0, I), one stream per
    // (seed, realization, ue, bs)
    ChannelSet draw_channel(const CovarianceSet &cov, const RngKey &key);

    // sigma^2 = 10^{avg log10 ||h_ip||^2} * 10^{-SNR/10} over serving pairs.
    // Throws ZeroChannel if a serving channel vanishes.
    NoiseModel calibrate_noise(const ChannelSet &channels, const Topology &topology, double snr_db,
                               NoiseNormalization mode = NoiseNormalization::Literal);

    // Signal and interference powers behind an SINR, noise excluded
    struct SinrTerms
    {
        RVec signal;
        RVec interference;
    };

    // Coherent terms of the true SINR, per UE
    SinrTerms sinr_true_terms(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology);
    // Incoherent per-BS terms of the approximate SINR, per serving pair
    SinrTerms sinr_approx_terms(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology);

    // Gamma_i, per UE
    RVec sinr_true(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology,
                   const NoiseModel &noise);
    // Gamma_ip, per serving pair
    RVec sinr_approx(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology,
                     const NoiseModel &noise);

    // Sum of log2(1 + Gamma_i), bits per channel use
    double sum_rate(const RVec &sinr);
    double total_power(const PrecoderSet &w);
    // Common scaling to the given total power; throws ZeroPrecoder
    PrecoderSet normalize_power(const PrecoderSet &w, double p_target);
    PrecoderSet scale_precoders(const PrecoderSet &w, double c);
}

#endif
