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

#include "cjt/baselines.hpp"

#include "cjt/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace cjt
{
    namespace
    {
        // Columns of H (H^H H + reg I)^{-1}, reg = 1e-10 * tr(H^H H) / cols
        CMat regularized_zf(const CMat &h)
        {
            const Eigen::Index u = h.cols();
            CMat gram = h.adjoint() * h;
            const double reg = 1e-10 * gram.trace().real() / double(u);
            gram += reg * CMat::Identity(u, u);
            return h * gram.ldlt().solve(CMat::Identity(u, u));
        }

        CVec unit(const CVec &v, Index ue)
        {
            const double n = v.norm();
            if (!(n > 0.0) || !std::isfinite(n))
                throw ZeroChannel("ZF direction of UE " + std::to_string(ue) + " vanished.");
            return v / n;
        }

        // Stacked channel of `ue` over the BS list
        CVec stacked(const ChannelSet &channels, Index ue, const std::vector<Index> &bss)
        {
            const Index n = channels.n_tx;
            CVec g(n * bss.size());
            for (Index k = 0; k < bss.size(); ++k)
                g.segment(k * n, n) = channels.at(ue, bss[k]);
            return g;
        }
    }

    PrecoderSet zf_decentralized(const ChannelSet &channels, const Topology &topology)
    {
        PrecoderSet out(topology);
        for (Index p = 0; p < topology.n_bs(); ++p)
        {
            const auto &up = topology.served(p);
            if (up.empty())
                continue;
            CMat h(topology.n_tx(), up.size());
            for (Index k = 0; k < up.size(); ++k)
                h.col(k) = channels.at(up[k], p);
            const CMat w = regularized_zf(h);
            for (Index k = 0; k < up.size(); ++k)
            {
                const Index i = up[k];
                const double share = 1.0 / std::sqrt(double(topology.serving_bs(i).size()));
                out.at(topology, i, p) = share * unit(w.col(k), i);
            }
        }
        return out;
    }

    PrecoderSet zf_centralized(const ChannelSet &channels, const Topology &topology)
    {
        const Index n = topology.n_tx();
        PrecoderSet out(topology);
        for (Index j = 0; j < topology.n_ue(); ++j)
        {
            const auto &tj = topology.serving_bs(j);
            CMat g(n * tj.size(), topology.n_ue());
            for (Index k = 0; k < topology.n_ue(); ++k)
                g.col(k) = stacked(channels, k, tj);
            const CVec v = unit(regularized_zf(g).col(j), j);
            for (Index b = 0; b < tj.size(); ++b)
                out.at(topology, j, tj[b]) = v.segment(b * n, n);
        }
        return out;
    }

    void WmmseConfig::validate() const
    {
        if (!(p_total > 0.0) || !std::isfinite(p_total))
            throw InvalidArgument("WMMSE power budget must be positive.");
        if (max_iters < 1)
            throw InvalidArgument("WMMSE needs at least one iteration.");
        if (!(tol > 0.0))
            throw InvalidArgument("WMMSE tolerance must be positive.");
        if (!(gamma_floor > 0.0))
            throw InvalidArgument("WMMSE target floor must be positive.");
    }

    WmmseResult wmmse_targets(const ChannelSet &channels, const Topology &topology, const NoiseModel &noise,
                              const WmmseConfig &cfg)
    {
        cfg.validate();
        if (!(noise.sigma2 > 0.0))
            throw InvalidArgument("Noise variance must be positive.");

        const Index n_ue = topology.n_ue();
        const Index n_bs = topology.n_bs();
        const Index n = topology.n_tx();
        const Index dim = n * n_bs;
        const double sigma2 = noise.sigma2;

        std::vector<Index> all_bs(n_bs);
        for (Index p = 0; p < n_bs; ++p)
            all_bs[p] = p;
        // g.col(i) is UE i's channel stacked over all BSs
        CMat g(dim, n_ue);
        for (Index i = 0; i < n_ue; ++i)
            g.col(i) = stacked(channels, i, all_bs);

        // Row indices of each UE's support
        std::vector<std::vector<Eigen::Index>> support(n_ue);
        for (Index j = 0; j < n_ue; ++j)
            for (Index p : topology.serving_bs(j))
                for (Index a = 0; a < n; ++a)
                    support[j].push_back(Eigen::Index(p * n + a));

        // Restricted matched filter at equal power
        CMat v = CMat::Zero(dim, n_ue);
        for (Index j = 0; j < n_ue; ++j)
        {
            for (auto r : support[j])
                v(r, j) = g(r, j);
            const double nv = v.col(j).norm();
            if (!(nv > 0.0))
                throw ZeroChannel("UE " + std::to_string(j) + " has zero serving channels.");
            v.col(j) *= std::sqrt(cfg.p_total / double(n_ue)) / nv;
        }

        auto rate_of = [&](const CMat &vv) {
            const CMat e = g.adjoint() * vv; // e(i, j) = g_i^H v_j
            double r = 0.0;
            for (Index i = 0; i < n_ue; ++i)
            {
                const double s = std::norm(e(i, i));
                const double t = e.row(i).squaredNorm() - s + sigma2;
                r += std::log2(1.0 + s / t);
            }
            return r;
        };

        WmmseResult out;
        double rate = rate_of(v);
        std::vector<Eigen::SelfAdjointEigenSolver<CMat>> eig(n_ue);
        std::vector<CVec> proj(n_ue);

        for (Index it = 1; it <= cfg.max_iters; ++it)
        {
            const CMat e = g.adjoint() * v;
            CVec u(n_ue);
            RVec omega(n_ue);
            for (Index i = 0; i < n_ue; ++i)
            {
                const double total = e.row(i).squaredNorm() + sigma2;
                u(i) = e(i, i) / total;
                const double mse = 1.0 - std::norm(e(i, i)) / total;
                omega(i) = 1.0 / std::max(mse, 1e-300);
            }

            RVec wgt(n_ue);
            for (Index i = 0; i < n_ue; ++i)
                wgt(i) = omega(i) * std::norm(u(i));
            const CMat m = g * wgt.cast<Complex>().asDiagonal() * g.adjoint();

            // Per-UE restricted systems (S^T M S + mu I) x = S^T g_j u_j omega_j
            for (Index j = 0; j < n_ue; ++j)
            {
                const auto &s = support[j];
                const Eigen::Index d = Eigen::Index(s.size());
                CMat ms(d, d);
                CVec b(d);
                for (Eigen::Index a = 0; a < d; ++a)
                {
                    b(a) = g(s[a], j) * u(j) * omega(j);
                    for (Eigen::Index c = 0; c < d; ++c)
                        ms(a, c) = m(s[a], s[c]);
                }
                eig[j].compute(ms);
                if (eig[j].info() != Eigen::Success)
                    throw NumericalFailure("WMMSE eigendecomposition failed.");
                proj[j] = eig[j].eigenvectors().adjoint() * b;
            }

            auto power_at = [&](double mu) {
                double p = 0.0;
                for (Index j = 0; j < n_ue; ++j)
                {
                    const RVec &lam = eig[j].eigenvalues();
                    for (Eigen::Index k = 0; k < lam.size(); ++k)
                    {
                        const double den = std::max(lam(k), 0.0) + mu;
                        p += std::norm(proj[j](k)) / (den * den);
                    }
                }
                return p;
            };

            double mu = 0.0;
            bool mu_zero_ok = true;
            for (Index j = 0; j < n_ue && mu_zero_ok; ++j)
                mu_zero_ok = eig[j].eigenvalues().minCoeff() > 1e-12 * eig[j].eigenvalues().cwiseAbs().maxCoeff();
            if (!mu_zero_ok || power_at(0.0) > cfg.p_total)
            {
                double lo = 0.0;
                double hi = 1.0;
                while (power_at(hi) > cfg.p_total)
                    hi *= 2.0;
                for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k)
                {
                    const double mid = 0.5 * (lo + hi);
                    (power_at(mid) > cfg.p_total ? lo : hi) = mid;
                }
                mu = hi;
            }

            CMat next = CMat::Zero(dim, n_ue);
            for (Index j = 0; j < n_ue; ++j)
            {
                const RVec &lam = eig[j].eigenvalues();
                CVec x = proj[j];
                for (Eigen::Index k = 0; k < lam.size(); ++k)
                    x(k) /= std::max(lam(k), 0.0) + mu;
                const CVec z = eig[j].eigenvectors() * x;
                for (Index a = 0; a < support[j].size(); ++a)
                    next(support[j][a], j) = z(Eigen::Index(a));
            }

            const double next_rate = rate_of(next);
            v = next;
            out.rate_trace.push_back(next_rate);
            out.iterations = it;
            const double gain = (next_rate - rate) / std::max(std::abs(next_rate), 1e-300);
            rate = next_rate;
            if (std::abs(gain) < cfg.tol)
            {
                out.converged = true;
                break;
            }
        }

        out.precoders = PrecoderSet(topology);
        for (Index k = 0; k < topology.n_pairs(); ++k)
        {
            const auto [i, p] = topology.pairs()[k];
            out.precoders.w[k] = v.block(Eigen::Index(p * n), Eigen::Index(i), Eigen::Index(n), 1);
        }
        const RVec gamma = sinr_approx(out.precoders, channels, topology, noise);
        out.targets.gamma.assign(gamma.data(), gamma.data() + gamma.size());
        for (double &g : out.targets.gamma)
            g = std::max(g, cfg.gamma_floor);
        return out;
    }
}
