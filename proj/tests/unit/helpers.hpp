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

#ifndef CJT_TEST_HELPERS_HPP
#define CJT_TEST_HELPERS_HPP

#include "cjt/net_model.hpp"
#include "cjt/topology.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace cjt::test
{
    inline double rel_err(double a, double b)
    {
        return std::abs(a - b) / std::max(std::abs(b), 1e-300);
    }

    inline CVec random_cvec(std::mt19937_64 &rng, Index n, double scale = 1.0)
    {
        std::normal_distribution<double> nd(0.0, scale);
        CVec v(n);
        for (Index k = 0; k < n; ++k)
            v(k) = Complex(nd(rng), nd(rng));
        return v;
    }

    inline CMat random_cmat(std::mt19937_64 &rng, Index r, Index c, double scale = 1.0)
    {
        std::normal_distribution<double> nd(0.0, scale);
        CMat m(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j)
                m(i, j) = Complex(nd(rng), nd(rng));
        return m;
    }

    // Random Hermitian PSD matrix of the given rank
    inline CMat random_psd(std::mt19937_64 &rng, Index n, Index rank, double scale = 1.0)
    {
        const CMat g = random_cmat(rng, n, rank, std::sqrt(scale / double(rank)));
        return g * g.adjoint();
    }

    // 3 BSs, 12 UEs on overlapping windows with exponential-correlation
    // covariances
    struct Instance
    {
        Topology topology;
        CovarianceSet cov;
        ChannelSet channels;
        NoiseModel noise;
    };

    inline Instance line_network(Index n_tx, Index n_ue, std::uint64_t seed, double snr_db = 15.0,
                                 Index n_bs = 3)
    {
        Instance in;
        in.topology = Topology::build(n_bs, n_ue, n_tx, overlapping_line_layout(n_bs, n_ue));
        in.cov = synth_covariance(in.topology, 0.5, Placement{}, seed);
        in.channels = draw_channel(in.cov, {seed, 0});
        in.noise = calibrate_noise(in.channels, in.topology, snr_db, NoiseNormalization::TotalPairs);
        return in;
    }

    // Gaussian elimination with partial pivoting in extended precision.
    // Slow and simple on purpose; used as an independent oracle.
    inline CVec naive_solve(const CMat &a, const CVec &b)
    {
        using C = std::complex<long double>;
        const Index n = Index(a.rows());
        std::vector<std::vector<C>> m(n, std::vector<C>(n + 1));
        for (Index r = 0; r < n; ++r)
        {
            for (Index c = 0; c < n; ++c)
                m[r][c] = C(a(r, c).real(), a(r, c).imag());
            m[r][n] = C(b(r).real(), b(r).imag());
        }
        for (Index c = 0; c < n; ++c)
        {
            Index piv = c;
            for (Index r = c + 1; r < n; ++r)
                if (std::abs(m[r][c]) > std::abs(m[piv][c]))
                    piv = r;
            std::swap(m[c], m[piv]);
            for (Index r = c + 1; r < n; ++r)
            {
                const C f = m[r][c] / m[c][c];
                for (Index k = c; k <= n; ++k)
                    m[r][k] -= f * m[c][k];
            }
        }
        std::vector<C> x(n);
        for (Index r = n; r-- > 0;)
        {
            C acc = m[r][n];
            for (Index k = r + 1; k < n; ++k)
                acc -= m[r][k] * x[k];
            x[r] = acc / m[r][r];
        }
        CVec out(n);
        for (Index r = 0; r < n; ++r)
            out(r) = Complex(double(x[r].real()), double(x[r].imag()));
        return out;
    }

    inline RVec naive_solve(const RMat &a, const RVec &b)
    {
        return naive_solve(CMat(a.cast<Complex>()), CVec(b.cast<Complex>())).real();
    }

    // Projection onto {x : |x|^2 <= eps} by bisection on the multiplier
    // of x = c / (1 + nu)
    inline CVec ball_oracle(const CVec &c, double eps)
    {
        if (c.squaredNorm() <= eps)
            return c;
        double lo = 0.0, hi = 1.0;
        while (c.squaredNorm() / ((1 + hi) * (1 + hi)) > eps)
            hi *= 2.0;
        for (int it = 0; it < 300; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (c.squaredNorm() / ((1 + mid) * (1 + mid)) > eps ? lo : hi) = mid;
        }
        return c / (1.0 + hi);
    }

    inline TargetSinr constant_targets(const Topology &t, double g)
    {
        TargetSinr out;
        out.gamma.assign(t.n_pairs(), g);
        return out;
    }
}

#endif
