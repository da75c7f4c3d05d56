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

#include "cjt/de.hpp"

#include "cjt/errors.hpp"
#include "cjt/udd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>
#include <tuple>

namespace cjt
{
    namespace
    {
        void check_inputs(const CovarianceSet &cov, const Topology &topology)
        {
            if (cov.n_ue != topology.n_ue() || cov.n_bs != topology.n_bs() || cov.n_tx != topology.n_tx())
                throw InvalidArgument("Covariance set dimensions do not match the topology.");
        }

        CMat hermitian_inverse(const CMat &a)
        {
            Eigen::LLT<CMat> llt(a);
            if (llt.info() != Eigen::Success)
                throw SingularSystem("Resolvent matrix is not positive definite.");
            return llt.solve(CMat::Identity(a.rows(), a.cols()));
        }

        // M_p^{-1} with M_p = N_T I + sum_j c_j Theta_jp / (1 + c_j m_jp)
        CMat resolvent(const CovarianceSet &cov, const RVec &c, const RMat &m_bar, Index p)
        {
            const Index n = cov.n_tx;
            CMat m = CMat::Identity(n, n) * double(n);
            for (Index j = 0; j < cov.n_ue; ++j)
                if (c(j) != 0.0)
                    m += (c(j) / (1.0 + c(j) * m_bar(j, p))) * cov.at(j, p);
            return hermitian_inverse(m);
        }

        RMat m_map(const CovarianceSet &cov, const RVec &c, const RMat &m_bar)
        {
            RMat out(cov.n_ue, cov.n_bs);
            for (Index p = 0; p < cov.n_bs; ++p)
            {
                const CMat minv = resolvent(cov, c, m_bar, p);
                for (Index i = 0; i < cov.n_ue; ++i)
                    out(i, p) = trace_of_product(cov.at(i, p), minv).real();
            }
            return out;
        }

        double max_relative_change(const RMat &next, const RMat &prev)
        {
            double worst = 0.0;
            for (Eigen::Index k = 0; k < next.size(); ++k)
            {
                const double scale = std::abs(next(k));
                const double d = std::abs(next(k) - prev(k));
                if (d == 0.0)
                    continue;
                worst = std::max(worst, scale > 0.0 ? d / scale : std::numeric_limits<double>::infinity());
            }
            return worst;
        }

        RMat solve_m_bar(const CovarianceSet &cov, const RVec &c, RMat m_bar, const DeConfig &cfg)
        {
            double change = std::numeric_limits<double>::infinity();
            for (Index it = 1; it <= cfg.max_inner; ++it)
            {
                RMat next = m_map(cov, c, m_bar);
                change = max_relative_change(next, m_bar);
                m_bar = std::move(next);
                if (!std::isfinite(change))
                    throw NoConvergence("Resolvent-trace fixed point diverged.", it, change);
                if (change < cfg.inner_tol)
                    return m_bar;
            }
            throw NoConvergence("Resolvent-trace fixed point did not converge.", cfg.max_inner, change);
        }

        double spectral_radius(const RMat &l)
        {
            if (l.size() == 0)
                return 0.0;
            Eigen::EigenSolver<RMat> es(l, false);
            if (es.info() != Eigen::Success)
                throw NumericalFailure("Eigenvalue computation of the derivative system failed.");
            return es.eigenvalues().cwiseAbs().maxCoeff();
        }
    }

    RMat de_m_map(const CovarianceSet &cov, const RVec &lambda_bar, const RMat &m_bar, const Topology &topology)
    {
        check_inputs(cov, topology);
        return m_map(cov, aggregate_multipliers(lambda_bar, topology), m_bar);
    }

    DeFixedPoint de_fixed_point(const CovarianceSet &cov, const TargetSinr &gamma, const Topology &topology,
                                const DeConfig &cfg)
    {
        check_inputs(cov, topology);
        cov.validate();
        gamma.validate(topology);

        const Index n_pairs = topology.n_pairs();
        DeFixedPoint out;
        out.lambda_bar = RVec::Ones(n_pairs);
        out.m_bar = RMat(cov.n_ue, cov.n_bs);
        for (Index i = 0; i < cov.n_ue; ++i)
            for (Index p = 0; p < cov.n_bs; ++p)
                out.m_bar(i, p) = cov.at(i, p).trace().real() / double(cov.n_tx);

        double change = std::numeric_limits<double>::infinity();
        RVec next(n_pairs);
        for (Index it = 1; it <= cfg.max_outer; ++it)
        {
            out.m_bar = solve_m_bar(cov, aggregate_multipliers(out.lambda_bar, topology), out.m_bar, cfg);
            for (Index k = 0; k < n_pairs; ++k)
            {
                const auto [i, p] = topology.pairs()[k];
                const double m = out.m_bar(i, p);
                if (!(m > 0.0))
                    throw ZeroChannel("Serving covariance (" + std::to_string(i) + ", " + std::to_string(p) +
                                      ") has no energy.");
                next(k) = gamma.gamma[k] / m;
            }
            const double eta = it > cfg.fallback_after ? cfg.fallback_damping : cfg.damping;
            next = (1.0 - eta) * out.lambda_bar + eta * next;
            change = ((next - out.lambda_bar).cwiseAbs().array() / next.array()).maxCoeff();
            out.lambda_bar = next;
            out.iterations = it;
            out.last_change = change;
            if (!std::isfinite(change))
                throw NoConvergence("Deterministic-equivalent multipliers diverged.", it, change);
            if (change < cfg.outer_tol)
            {
                // Leave m_bar consistent with the returned multipliers
                out.m_bar = solve_m_bar(cov, aggregate_multipliers(out.lambda_bar, topology), out.m_bar, cfg);
                return out;
            }
        }
        throw NoConvergence("Deterministic-equivalent multipliers did not converge; the targets may be infeasible.",
                            cfg.max_outer, change);
    }

    std::vector<CMat> de_t_matrix(const CovarianceSet &cov, const RVec &lambda_bar, const RMat &m_bar,
                                  const Topology &topology)
    {
        check_inputs(cov, topology);
        const RVec c = aggregate_multipliers(lambda_bar, topology);
        const Index n = cov.n_tx;
        std::vector<CMat> t(cov.n_bs);
        for (Index q = 0; q < cov.n_bs; ++q)
        {
            CMat inv = CMat::Identity(n, n);
            for (Index k = 0; k < cov.n_ue; ++k)
                if (c(k) != 0.0)
                    inv += (c(k) / (double(n) * (1.0 + c(k) * m_bar(k, q)))) * cov.at(k, q);
            t[q] = hermitian_inverse(inv);
        }
        return t;
    }

    DeDerivative de_m_prime(const CovarianceSet &cov, const RVec &lambda_bar, const RMat &m_bar, const CMat &t_q,
                            const Topology &topology, Index q, const DeConfig &cfg)
    {
        check_inputs(cov, topology);
        if (q >= cov.n_bs)
            throw IndexOutOfRange("BS index out of range.");

        const Index n_ue = cov.n_ue;
        const double n = double(cov.n_tx);
        const RVec c = aggregate_multipliers(lambda_bar, topology);

        std::vector<CMat> x(n_ue);
        for (Index k = 0; k < n_ue; ++k)
            x[k] = cov.at(k, q) * t_q;

        RMat gram(n_ue, n_ue);
        for (Index h = 0; h < n_ue; ++h)
            for (Index l = h; l < n_ue; ++l)
                gram(h, l) = gram(l, h) = trace_of_product(x[h], x[l]).real();

        DeDerivative d;
        d.l = RMat(n_ue, n_ue);
        for (Index h = 0; h < n_ue; ++h)
            for (Index l = 0; l < n_ue; ++l)
            {
                const double den = 1.0 + c(l) * m_bar(l, q);
                d.l(h, l) = c(l) * c(l) * gram(h, l) / (n * n * den * den);
            }
        d.u = gram / n;

        const double rho = spectral_radius(d.l);
        if (!(rho < cfg.spectral_guard))
            throw UnstableDerivativeSystem("Derivative system of BS " + std::to_string(q) +
                                           " has spectral radius " + std::to_string(rho) + ".");

        Eigen::PartialPivLU<RMat> lu(RMat::Identity(n_ue, n_ue) - d.l);
        d.m_prime = lu.solve(d.u);
        return d;
    }

    double de_coupling_offdiag(const RVec &c, const RMat &m_bar, const std::vector<DeDerivative> &derivative,
                               Index n_tx, Index i, Index j, Index q)
    {
        const double den = 1.0 + c(i) * m_bar(i, q);
        return -derivative.at(q).m_prime(j, i) / (double(n_tx) * den * den);
    }

    std::pair<RMat, RVec> de_coupling_and_delta(const RVec &lambda_bar, const RMat &m_bar,
                                                const std::vector<DeDerivative> &derivative,
                                                const TargetSinr &gamma, double sigma2, const Topology &topology)
    {
        gamma.validate(topology);
        if (derivative.size() != topology.n_bs())
            throw InvalidArgument("One derivative system per BS is required.");

        const RVec c = aggregate_multipliers(lambda_bar, topology);
        const auto &pairs = topology.pairs();
        const Index n = topology.n_pairs();
        RMat f = RMat::Zero(n, n);
        for (Index k = 0; k < n; ++k)
        {
            const auto [i, p] = pairs[k];
            for (Index l = 0; l < n; ++l)
            {
                const auto [j, q] = pairs[l];
                if (l == k)
                    f(k, l) = m_bar(i, p) * m_bar(i, p) / gamma.gamma[k];
                else if (j != i)
                    f(k, l) = de_coupling_offdiag(c, m_bar, derivative, topology.n_tx(), i, j, q);
            }
        }
        RVec delta = solve_delta(f, sigma2, topology.n_tx());
        return {std::move(f), std::move(delta)};
    }

    InterferenceBounds de_bounds(const DeState &state, const Topology &topology, double alpha)
    {
        if (state.delta_bar.size() != Eigen::Index(topology.n_pairs()))
            throw InvalidArgument("Power scaling count does not match the number of serving pairs.");
        const RVec c = aggregate_multipliers(state.lambda_bar, topology);
        const double n = double(topology.n_tx());

        InterferenceBounds b;
        b.value = RMat::Zero(topology.n_ue(), topology.n_bs());
        for (Index l = 0; l < topology.n_pairs(); ++l)
        {
            const auto [j, q] = topology.pairs()[l];
            for (Index i = 0; i < topology.n_ue(); ++i)
                if (i != j)
                    b.value(i, q) -= state.delta_bar(l) / n *
                                     de_coupling_offdiag(c, state.m_bar, state.derivative, topology.n_tx(), i, j, q);
        }
        b.provenance = BoundProvenance::DeterministicEquivalent;
        if (alpha != 1.0)
            b = b.scaled(alpha);
        return b;
    }

    DeState de_interference_bounds(const CovarianceSet &cov, const TargetSinr &gamma, double sigma2,
                                   const Topology &topology, const DeConfig &cfg, double alpha)
    {
        DeState s;
        const DeFixedPoint fp = de_fixed_point(cov, gamma, topology, cfg);
        s.lambda_bar = fp.lambda_bar;
        s.m_bar = fp.m_bar;
        s.t_mat = de_t_matrix(cov, s.lambda_bar, s.m_bar, topology);
        s.derivative.reserve(topology.n_bs());
        for (Index q = 0; q < topology.n_bs(); ++q)
            s.derivative.push_back(de_m_prime(cov, s.lambda_bar, s.m_bar, s.t_mat[q], topology, q, cfg));
        std::tie(s.f_bar, s.delta_bar) =
            de_coupling_and_delta(s.lambda_bar, s.m_bar, s.derivative, gamma, sigma2, topology);
        s.bounds = de_bounds(s, topology, alpha);
        return s;
    }
}
