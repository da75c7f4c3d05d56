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

#include "cjt/udd.hpp"

#include "cjt/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>

namespace cjt
{
    namespace
    {
        void check_inputs(const ChannelSet &channels, const Topology &topology)
        {
            if (channels.n_ue != topology.n_ue() || channels.n_bs != topology.n_bs() ||
                channels.n_tx != topology.n_tx())
                throw InvalidArgument("Channel set dimensions do not match the topology.");
            for (const auto &h : channels.h)
                if (!h.allFinite())
                    throw InvalidArgument("Channels must be finite.");
        }

        // N x n_ue matrix whose column j is h_jp
        CMat channels_at_bs(const ChannelSet &channels, Index bs)
        {
            CMat hp(channels.n_tx, channels.n_ue);
            for (Index j = 0; j < channels.n_ue; ++j)
                hp.col(j) = channels.at(j, bs);
            return hp;
        }

        // Cholesky factor of N_T I + sum_{j != ue} c_j h_jp h_jp^H
        Eigen::LLT<CMat> interference_covariance(const CMat &hp, const RVec &c, Index ue)
        {
            const Index n = Index(hp.rows());
            RVec weights = c;
            weights(ue) = 0.0;
            CMat sigma = CMat::Identity(n, n) * double(n);
            sigma.noalias() += hp * weights.cast<Complex>().asDiagonal() * hp.adjoint();
            Eigen::LLT<CMat> llt(sigma);
            if (llt.info() != Eigen::Success)
                throw SingularSystem("Interference covariance is not positive definite.");
            return llt;
        }
    }

    RVec aggregate_multipliers(const RVec &lambda, const Topology &topology)
    {
        RVec c = RVec::Zero(topology.n_ue());
        for (Index k = 0; k < topology.n_pairs(); ++k)
            c(topology.pairs()[k].ue) += lambda(k);
        return c;
    }

    MultiplierSet solve_lambda_fixed_point(const ChannelSet &channels, const TargetSinr &gamma,
                                           const Topology &topology, const UddConfig &cfg)
    {
        check_inputs(channels, topology);
        gamma.validate(topology);

        std::vector<CMat> hp(topology.n_bs());
        for (Index p = 0; p < topology.n_bs(); ++p)
            hp[p] = channels_at_bs(channels, p);

        MultiplierSet out;
        out.lambda = RVec::Ones(topology.n_pairs());
        RVec next(topology.n_pairs());
        double change = std::numeric_limits<double>::infinity();

        for (Index it = 1; it <= cfg.max_iters; ++it)
        {
            const RVec c = aggregate_multipliers(out.lambda, topology);
            for (Index k = 0; k < topology.n_pairs(); ++k)
            {
                const auto [i, p] = topology.pairs()[k];
                const auto llt = interference_covariance(hp[p], c, i);
                const CVec &h = channels.at(i, p);
                const double q = h.dot(llt.solve(h)).real();
                if (!(q > 0.0))
                    throw ZeroChannel("Serving channel (" + std::to_string(i) + ", " + std::to_string(p) +
                                      ") has no energy.");
                next(k) = gamma.gamma[k] / q;
            }

            const double eta = it > cfg.fallback_after ? cfg.fallback_damping : cfg.damping;
            next = (1.0 - eta) * out.lambda + eta * next;
            change = ((next - out.lambda).cwiseAbs().array() / next.array()).maxCoeff();
            out.lambda = next;
            out.iterations = it;
            out.last_change = change;

            if (!std::isfinite(change))
                throw NoConvergence("Multiplier fixed point diverged.", it, change);
            if (change < cfg.tol)
                return out;
        }
        throw NoConvergence("Multiplier fixed point did not converge; the targets may be infeasible.",
                            cfg.max_iters, change);
    }

    std::vector<CVec> compute_w_hat(const ChannelSet &channels, const RVec &lambda, const Topology &topology)
    {
        check_inputs(channels, topology);
        if (lambda.size() != Eigen::Index(topology.n_pairs()))
            throw InvalidArgument("Multiplier count does not match the number of serving pairs.");
        if ((lambda.array() < 0.0).any())
            throw InvalidArgument("Multipliers must be non-negative.");

        const RVec c = aggregate_multipliers(lambda, topology);
        std::vector<CVec> w_hat(topology.n_pairs());
        std::vector<CMat> hp(topology.n_bs());
        for (Index p = 0; p < topology.n_bs(); ++p)
            hp[p] = channels_at_bs(channels, p);
        for (Index k = 0; k < topology.n_pairs(); ++k)
        {
            const auto [i, p] = topology.pairs()[k];
            w_hat[k] = interference_covariance(hp[p], c, i).solve(channels.at(i, p));
        }
        return w_hat;
    }

    RMat coupling_matrix(const ChannelSet &channels, const std::vector<CVec> &w_hat, const TargetSinr &gamma,
                         const Topology &topology)
    {
        const Index n = topology.n_pairs();
        if (w_hat.size() != n)
            throw InvalidArgument("Direction count does not match the number of serving pairs.");
        gamma.validate(topology);

        const auto &pairs = topology.pairs();
        RMat f = RMat::Zero(n, n);
        for (Index k = 0; k < n; ++k)
        {
            const auto [i, p] = pairs[k];
            for (Index l = 0; l < n; ++l)
            {
                const auto [j, q] = pairs[l];
                if (l == k)
                    f(k, l) = std::norm(w_hat[k].dot(channels.at(i, p))) / gamma.gamma[k];
                else if (j != i)
                    f(k, l) = -std::norm(w_hat[l].dot(channels.at(i, q)));
            }
        }
        return f;
    }

    RVec solve_delta(const RMat &f, double sigma2, Index n_tx)
    {
        if (f.rows() != f.cols() || f.rows() == 0)
            throw InvalidArgument("Coupling matrix must be square and nonempty.");
        if (!(sigma2 > 0.0))
            throw InvalidArgument("Noise variance must be positive.");

        // Row equilibration keeps the conditioning test meaningful when the
        // targets span many orders of magnitude
        const RVec scale = f.cwiseAbs().rowwise().maxCoeff();
        if (!(scale.minCoeff() > 0.0) || !scale.allFinite())
            throw SingularCoupling("Coupling matrix has a zero or non-finite row.");
        const RVec inv_scale = scale.cwiseInverse();
        Eigen::PartialPivLU<RMat> lu(inv_scale.asDiagonal() * f);
        if (!(lu.rcond() > 1e-14))
            throw SingularCoupling("Coupling matrix is singular to working precision.");
        const RVec delta = lu.solve(inv_scale * (double(n_tx) * sigma2));
        for (Eigen::Index k = 0; k < delta.size(); ++k)
        {
            if (!std::isfinite(delta(k)))
                throw SingularCoupling("Power scaling solve produced a non-finite value.");
            if (delta(k) <= 0.0)
                throw Infeasible("Power scaling " + std::to_string(k) +
                                     " is not positive; the target SINRs are unreachable.",
                                 Index(k), delta(k));
        }
        return delta;
    }

    PrecoderSet udd_precoders(const std::vector<CVec> &w_hat, const RVec &delta, const Topology &topology)
    {
        if (w_hat.size() != topology.n_pairs() || delta.size() != Eigen::Index(topology.n_pairs()))
            throw InvalidArgument("Direction or scaling count does not match the number of serving pairs.");
        PrecoderSet out(topology);
        for (Index k = 0; k < topology.n_pairs(); ++k)
            out.w[k] = std::sqrt(delta(k) / double(topology.n_tx())) * w_hat[k];
        return out;
    }

    InterferenceBounds exact_bounds(const ChannelSet &channels, const std::vector<CVec> &w_hat, const RVec &delta,
                                    const Topology &topology)
    {
        if (w_hat.size() != topology.n_pairs() || delta.size() != Eigen::Index(topology.n_pairs()))
            throw InvalidArgument("Direction or scaling count does not match the number of serving pairs.");

        InterferenceBounds b;
        b.value = RMat::Zero(topology.n_ue(), topology.n_bs());
        b.provenance = BoundProvenance::Exact;
        const double n = double(topology.n_tx());
        for (Index l = 0; l < topology.n_pairs(); ++l)
        {
            const auto [j, q] = topology.pairs()[l];
            for (Index i = 0; i < topology.n_ue(); ++i)
                if (i != j)
                    b.value(i, q) += delta(l) / n * std::norm(channels.at(i, q).dot(w_hat[l]));
        }
        return b;
    }

    UddSolution solve_udd(const ChannelSet &channels, const TargetSinr &gamma, const Topology &topology,
                          const NoiseModel &noise, const UddConfig &cfg)
    {
        UddSolution s;
        s.multipliers = solve_lambda_fixed_point(channels, gamma, topology, cfg);
        s.coupling.w_hat = compute_w_hat(channels, s.multipliers.lambda, topology);
        s.coupling.f = coupling_matrix(channels, s.coupling.w_hat, gamma, topology);
        s.coupling.delta = solve_delta(s.coupling.f, noise.sigma2, topology.n_tx());
        s.precoders = udd_precoders(s.coupling.w_hat, s.coupling.delta, topology);
        s.bounds = exact_bounds(channels, s.coupling.w_hat, s.coupling.delta, topology);
        return s;
    }
}
