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

#include "cjt/net_model.hpp"

#include "cjt/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace cjt
{
    CovarianceSet::CovarianceSet(Index n_ue_, Index n_bs_, Index n_tx_)
        : n_ue(n_ue_), n_bs(n_bs_), n_tx(n_tx_), theta(n_ue_ * n_bs_, CMat::Zero(n_tx_, n_tx_))
    {
    }

    void CovarianceSet::validate() const
    {
        for (Index i = 0; i < n_ue; ++i)
            for (Index p = 0; p < n_bs; ++p)
            {
                const CMat &t = at(i, p);
                if (t.rows() != Eigen::Index(n_tx) || t.cols() != Eigen::Index(n_tx))
                    throw InvalidArgument("Covariance (" + std::to_string(i) + ", " + std::to_string(p) +
                                          ") has the wrong shape.");
                if ((t - t.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
                    throw NumericalFailure("Covariance (" + std::to_string(i) + ", " + std::to_string(p) +
                                           ") is not Hermitian.");
                Eigen::SelfAdjointEigenSolver<CMat> es(t, Eigen::EigenvaluesOnly);
                if (es.info() != Eigen::Success)
                    throw NumericalFailure("Eigendecomposition failed during covariance validation.");
                const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
                if (es.eigenvalues().minCoeff() < -1e-10 * norm)
                    throw NumericalFailure("Covariance (" + std::to_string(i) + ", " + std::to_string(p) +
                                           ") is not positive semidefinite.");
            }
    }

    ChannelSet::ChannelSet(Index n_ue_, Index n_bs_, Index n_tx_)
        : n_ue(n_ue_), n_bs(n_bs_), n_tx(n_tx_), h(n_ue_ * n_bs_, CVec::Zero(n_tx_))
    {
    }

    PrecoderSet::PrecoderSet(const Topology &topology)
        : w(topology.n_pairs(), CVec::Zero(topology.n_tx()))
    {
    }

    const char *to_string(NoiseNormalization mode)
    {
        return mode == NoiseNormalization::Literal ? "literal" : "total-pairs";
    }

    NoiseNormalization noise_normalization_from_string(const std::string &s)
    {
        if (s == "literal")
            return NoiseNormalization::Literal;
        if (s == "total-pairs")
            return NoiseNormalization::TotalPairs;
        throw InvalidArgument("Unknown noise normalization '" + s + "' (expected literal or total-pairs).");
    }

    void TargetSinr::validate(const Topology &t) const
    {
        if (gamma.size() != t.n_pairs())
            throw InvalidArgument("Target SINR count does not match the number of serving pairs.");
        for (double g : gamma)
            if (!std::isfinite(g) || g <= 0.0)
                throw InvalidArgument("Target SINRs must be finite and strictly positive.");
    }

    TargetSinr TargetSinr::scaled(double beta) const
    {
        TargetSinr out = *this;
        for (double &g : out.gamma)
            g *= beta;
        return out;
    }

    RMat draw_pathloss_gains(const Topology &topology, const Placement &placement, std::uint64_t seed)
    {
        if (placement.cell_radius <= 0.0 || placement.min_distance <= 0.0 || placement.reference_gain <= 0.0 ||
            placement.site_spacing <= 0.0)
            throw InvalidArgument("Placement parameters must be positive.");

        const Index n_bs = topology.n_bs();
        const Index n_ue = topology.n_ue();
        const double r = placement.cell_radius;

        std::vector<double> bs_x(n_bs);
        for (Index p = 0; p < n_bs; ++p)
            bs_x[p] = placement.site_spacing * r * double(p);

        RMat gains(n_ue, n_bs);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Index i = 0; i < n_ue; ++i)
        {
            auto rng = make_stream({seed, 0x706c6163ull, i});
            const auto &ti = topology.serving_bs(i);
            double cx = 0.0;
            for (Index p : ti)
                cx += bs_x[p];
            cx /= double(ti.size());

            const double rad = r * std::sqrt(unif(rng));
            const double phi = 2.0 * std::numbers::pi * unif(rng);
            const double ux = cx + rad * std::cos(phi);
            const double uy = rad * std::sin(phi);

            for (Index p = 0; p < n_bs; ++p)
            {
                double d = std::hypot(ux - bs_x[p], uy) / r;
                d = std::max(d, placement.min_distance);
                gains(i, p) = placement.reference_gain * std::pow(d, -placement.pathloss_exponent);
            }
        }
        return gains;
    }

    RMat exponential_correlation(Index n_tx, double rho)
    {
        if (!(rho >= 0.0 && rho < 1.0))
            throw InvalidArgument("Antenna correlation must lie in [0, 1).");
        RMat c(n_tx, n_tx);
        for (Index a = 0; a < n_tx; ++a)
            for (Index b = 0; b < n_tx; ++b)
                c(a, b) = a == b ? 1.0 : std::pow(rho, double(a > b ? a - b : b - a));
        return c;
    }

    CovarianceSet synth_covariance(const Topology &topology, double corr, const RMat &gains)
    {
        if (gains.rows() != Eigen::Index(topology.n_ue()) || gains.cols() != Eigen::Index(topology.n_bs()))
            throw InvalidArgument("Gain matrix must be n_ue x n_bs.");
        if ((gains.array() <= 0.0).any())
            throw InvalidArgument("Pathloss gains must be positive.");

        const CMat c = exponential_correlation(topology.n_tx(), corr).cast<Complex>();
        CovarianceSet cov(topology.n_ue(), topology.n_bs(), topology.n_tx());
        for (Index i = 0; i < topology.n_ue(); ++i)
            for (Index p = 0; p < topology.n_bs(); ++p)
                cov.at(i, p) = gains(i, p) * c;
        return cov;
    }

    CovarianceSet synth_covariance(const Topology &topology, double corr, const Placement &placement,
                                   std::uint64_t seed)
    {
        return synth_covariance(topology, corr, draw_pathloss_gains(topology, placement, seed));
    }

    CMat psd_sqrt(const CMat &theta)
    {
        Eigen::SelfAdjointEigenSolver<CMat> es(theta);
        if (es.info() != Eigen::Success)
            throw NumericalFailure("Hermitian eigendecomposition did not converge.");
        const RVec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return es.eigenvectors() * root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    }

    ChannelSet draw_channel(const CovarianceSet &cov, const RngKey &key)
    {
        ChannelSet out(cov.n_ue, cov.n_bs, cov.n_tx);
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
        for (Index i = 0; i < cov.n_ue; ++i)
            for (Index p = 0; p < cov.n_bs; ++p)
            {
                auto rng = make_stream({key.seed, key.realization, i, p});
                CVec z(cov.n_tx);
                for (Index a = 0; a < cov.n_tx; ++a)
                {
                    const double re = normal(rng);
                    const double im = normal(rng);
                    z(a) = Complex(re, im);
                }
                out.at(i, p) = psd_sqrt(cov.at(i, p)) * z;
            }
        return out;
    }

    NoiseModel calibrate_noise(const ChannelSet &channels, const Topology &topology, double snr_db,
                               NoiseNormalization mode)
    {
        double acc = 0.0;
        double pairs = 0.0;
        for (Index p = 0; p < topology.n_bs(); ++p)
        {
            const auto &up = topology.served(p);
            if (up.empty())
                continue;
            double s = 0.0;
            for (Index i : up)
            {
                const double g = channels.at(i, p).squaredNorm();
                if (!(g > 0.0))
                    throw ZeroChannel("Serving channel (" + std::to_string(i) + ", " + std::to_string(p) +
                                      ") is zero.");
                s += std::log10(g);
            }
            if (mode == NoiseNormalization::Literal)
                acc += s / double(up.size());
            else
                acc += s;
            pairs += double(up.size());
        }
        if (mode == NoiseNormalization::TotalPairs)
            acc /= pairs;

        NoiseModel noise;
        noise.sigma2 = std::pow(10.0, acc) * std::pow(10.0, -snr_db / 10.0);
        noise.snr_db = snr_db;
        noise.mode = mode;
        return noise;
    }

    SinrTerms sinr_true_terms(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology)
    {
        const Index n_ue = topology.n_ue();
        // g(i, j) = sum_{q in T_j} h_iq^H w_jq
        CMat g = CMat::Zero(n_ue, n_ue);
        for (Index k = 0; k < topology.n_pairs(); ++k)
        {
            const auto [j, q] = topology.pairs()[k];
            for (Index i = 0; i < n_ue; ++i)
                g(i, j) += channels.at(i, q).dot(w.w[k]);
        }

        SinrTerms terms{RVec::Zero(n_ue), RVec::Zero(n_ue)};
        for (Index i = 0; i < n_ue; ++i)
            for (Index j = 0; j < n_ue; ++j)
            {
                if (i == j)
                    terms.signal(i) = std::norm(g(i, i));
                else
                    terms.interference(i) += std::norm(g(i, j));
            }
        return terms;
    }

    SinrTerms sinr_approx_terms(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology)
    {
        const Index n_ue = topology.n_ue();
        // Interference seen by UE i is the same for all of its serving BSs
        RVec interference = RVec::Zero(n_ue);
        for (Index k = 0; k < topology.n_pairs(); ++k)
        {
            const auto [j, q] = topology.pairs()[k];
            for (Index i = 0; i < n_ue; ++i)
                if (i != j)
                    interference(i) += std::norm(channels.at(i, q).dot(w.w[k]));
        }

        SinrTerms terms{RVec::Zero(topology.n_pairs()), RVec::Zero(topology.n_pairs())};
        for (Index k = 0; k < topology.n_pairs(); ++k)
        {
            const auto [i, p] = topology.pairs()[k];
            terms.signal(k) = std::norm(channels.at(i, p).dot(w.w[k]));
            terms.interference(k) = interference(i);
        }
        return terms;
    }

    RVec sinr_true(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology,
                   const NoiseModel &noise)
    {
        const SinrTerms t = sinr_true_terms(w, channels, topology);
        return t.signal.array() / (t.interference.array() + noise.sigma2);
    }

    RVec sinr_approx(const PrecoderSet &w, const ChannelSet &channels, const Topology &topology,
                     const NoiseModel &noise)
    {
        const SinrTerms t = sinr_approx_terms(w, channels, topology);
        return t.signal.array() / (t.interference.array() + noise.sigma2);
    }

    double sum_rate(const RVec &sinr)
    {
        double r = 0.0;
        for (Eigen::Index i = 0; i < sinr.size(); ++i)
            r += std::log2(1.0 + sinr(i));
        return r;
    }

    double total_power(const PrecoderSet &w)
    {
        double p = 0.0;
        for (const auto &v : w.w)
            p += v.squaredNorm();
        return p;
    }

    PrecoderSet scale_precoders(const PrecoderSet &w, double c)
    {
        PrecoderSet out = w;
        for (auto &v : out.w)
            v *= c;
        return out;
    }

    PrecoderSet normalize_power(const PrecoderSet &w, double p_target)
    {
        if (!(p_target > 0.0))
            throw InvalidArgument("Target power must be positive.");
        const double p = total_power(w);
        if (!(p > 0.0))
            throw ZeroPrecoder("Cannot normalize an all-zero precoder set.");
        if (!std::isfinite(p))
            throw NumericalFailure("Precoder power is not finite.");
        return scale_precoders(w, std::sqrt(p_target / p));
    }
}
